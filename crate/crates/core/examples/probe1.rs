use seqtest::csnr::{solve_boundaries, solve_phi0, RunningCostFn};
use seqtest::fbp::{extract_boundaries, solve_vi, Grid2D, SolveParams};
use seqtest::model::builtin_constant;

fn main() {
    let t0 = std::time::Instant::now();
    let model: seqtest::Model = builtin_constant(0.0, 1.0, 1.0).unwrap();
    let grid: seqtest::Grid = Grid2D::regular(-4.0, 4.0, 257, -8.0, 8.0, 513, false).unwrap();
    let surf = solve_vi(&model, &grid, &SolveParams::default()).unwrap();
    println!("decoupled solve: {:?}, residual {:.2e}, iters {}", t0.elapsed(), surf.residual, surf.iterations);
    let c = model.cost_rate();
    let pair = extract_boundaries(&surf, 1e-7 * (1.0 + c)).unwrap();
    let sol: seqtest::BandSolution = solve_boundaries(1.0, &RunningCostFn::constant(1.0).unwrap()).unwrap();
    let phi0 = solve_phi0(&sol).unwrap();
    let du: f64 = 16.0 / 512.0;
    println!("closed form l0 = {:.10}, l1 = {:.10}, phi0 = {:.12}", sol.l0, sol.l1, phi0);
    println!("grid      l0 = {:.10}, l1 = {:.10}", pair.l0[128], pair.l1[128]);
    println!("log-diff l0 = {:.4} cells, l1 = {:.4} cells",
        (pair.l0[128].ln() - sol.l0.ln()).abs() / du,
        (pair.l1[128].ln() - sol.l1.ln()).abs() / du);
    println!("concavity defect = {:.3e}", surf.concavity_defect());
    println!("payoff defect = {:.3e}", surf.payoff_bound_defect());

    // general sweep
    let t1 = std::time::Instant::now();
    let surf2 = solve_vi(&model, &grid, &SolveParams { force_general: true, ..Default::default() }).unwrap();
    println!("general solve: {:?}, residual {:.2e}, iters {}", t1.elapsed(), surf2.residual, surf2.iterations);
    let pair2 = extract_boundaries(&surf2, 1e-7 * (1.0 + c)).unwrap();
    println!("general   l0 = {:.10}, l1 = {:.10}  (cells: {:.3}, {:.3})", pair2.l0[128], pair2.l1[128],
        (pair2.l0[128].ln() - sol.l0.ln()).abs() / du,
        (pair2.l1[128].ln() - sol.l1.ln()).abs() / du);
    println!("general concavity defect = {:.3e}", surf2.concavity_defect());
}
