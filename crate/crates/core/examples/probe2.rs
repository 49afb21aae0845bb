use seqtest::fbp::{extract_boundaries, solve_finite_horizon, solve_vi, validate_boundaries, Grid2D, SolveParams};
use seqtest::model::{builtin_bessel, check_assumptions, Regime};
use seqtest::simulate::supremum;

fn main() {
    // Bessel(3,4) acceptance-style solve
    let t0 = std::time::Instant::now();
    let model: seqtest::Model = builtin_bessel(3.0, 4.0).unwrap();
    let grid: seqtest::Grid = Grid2D::regular(0.3, 2.2, 201, -1.0, 1.0, 513, true).unwrap();
    let rep = check_assumptions(&model, &grid.x_nodes).unwrap();
    println!("regime: {:?}", rep.regime);
    let surf = solve_vi(&model, &grid, &SolveParams::default()).unwrap();
    println!("bessel solve: {:?}, residual {:.2e}, iters {}", t0.elapsed(), surf.residual, surf.iterations);
    println!("concavity defect: {:.3e}", surf.concavity_defect());
    println!("monotonicity defect: {:.3e}", surf.monotonicity_defect());
    let pair = extract_boundaries(&surf, 1e-7 * 2.0).unwrap();
    let report = validate_boundaries(&pair, Regime::A31);
    println!("validate: pass={} viol={:?}", report.pass, report.first_violation);
    let ix = grid.x_nodes.iter().position(|&x| (x - 1.0).abs() < 0.01).unwrap();
    println!("bracket at x~1: ({:.6}, {:.6})  x={}", pair.l0[ix], pair.l1[ix], grid.x_nodes[ix]);
    println!("l0 range: {:.6} .. {:.6}", pair.l0[0], pair.l0[200]);
    println!("l1 range: {:.6} .. {:.6}", pair.l1[0], pair.l1[200]);

    // finite-horizon sandwich on the constant model at acceptance scale
    let t1 = std::time::Instant::now();
    let cmodel: seqtest::Model = seqtest::model::builtin_constant(0.0, 1.0, 1.0).unwrap();
    let cgrid: seqtest::Grid = Grid2D::regular(-4.0, 4.0, 257, -8.0, 8.0, 513, false).unwrap();
    let v = solve_vi(&cmodel, &cgrid, &SolveParams::default()).unwrap();
    let v8 = solve_finite_horizon(&cmodel, &cgrid, 8.0, 256).unwrap();
    println!("finite horizon T=8 nt=256: {:?}", t1.elapsed());
    let mut worst_upper = f64::NEG_INFINITY;
    let mut worst_lower = f64::NEG_INFINITY;
    for ix in 0..cgrid.nx() {
        for (ju, &u) in cgrid.logphi_nodes.iter().enumerate() {
            let phi = u.exp();
            let upper_viol = v.at(ix, ju) - v8.at(ix, ju);
            let lower_viol = (v8.at(ix, ju) - supremum::gamma(phi, 8.0)) - v.at(ix, ju);
            worst_upper = worst_upper.max(upper_viol);
            worst_lower = worst_lower.max(lower_viol);
        }
    }
    println!("sandwich: worst upper violation {:.3e}, worst lower violation {:.3e}", worst_upper, worst_lower);
}
