use seqtest::csnr::{solve_boundaries, RunningCostFn};
use seqtest::fbp::BoundaryPair;
use seqtest::minimax::{find_lfd, LfdSettings};
use seqtest::simulate::{McSettings, RngSpec};
use seqtest::model::builtin_constant;

fn main() {
    let t0 = std::time::Instant::now();
    let model: seqtest::Model = builtin_constant(0.0, 1.0, 1.0).unwrap();
    let sol: seqtest::BandSolution = solve_boundaries(1.0, &RunningCostFn::constant(1.0).unwrap()).unwrap();
    let pair = BoundaryPair::constant(-50.0, 50.0, sol.l0, sol.l1);
    let mc = McSettings { n_paths: 200_000, n_batches: 20, dt: 1e-4, horizon: Some(50.0) };
    let lfd = find_lfd(&model, 0.0, &pair, &LfdSettings::default(), &mc, RngSpec::new(2024, 0)).unwrap();
    println!("find_lfd: {:?}", t0.elapsed());
    println!("bracket: ({:.6}, {:.6})", lfd.bracket.0, lfd.bracket.1);
    for r in &lfd.roots {
        println!("root: phi0={:.6} residual={:+.4e} stderr={:.2e}", r.phi0, r.residual, r.stderr);
    }
    println!("endpoints: lo={:+.5} hi={:+.5}", lfd.endpoint_checks.0, lfd.endpoint_checks.1);
    for e in &lfd.grid {
        println!("  phi={:.5} value={:+.5e} se={:.2e} mass={:.1e}", e.phi, e.value, e.stderr, e.mass_at_one);
    }
}
