use seqtest::csnr::{eval_ubar, solve_boundaries, solve_phi0, RunningCostFn};
use seqtest::fbp::BoundaryPair;
use seqtest::model::builtin_constant;
use seqtest::risk::estimate_jbar;
use seqtest::simulate::{McSettings, RngSpec, StoppingRule};

fn main() {
    let model: seqtest::Model = builtin_constant(0.0, 1.0, 1.0).unwrap();
    let mut sol: seqtest::BandSolution = solve_boundaries(1.0, &RunningCostFn::constant(1.0).unwrap()).unwrap();
    sol.phi0 = Some(solve_phi0(&sol).unwrap());
    let pair = BoundaryPair::constant(-50.0, 50.0, sol.l0, sol.l1);
    let rule = StoppingRule::from_pair(&pair);
    let exact = eval_ubar(&sol, 1.0, 1.0).unwrap();
    for &dt in &[1e-5, 1e-6] {
        let t = std::time::Instant::now();
        let mc = McSettings { n_paths: 50_000, n_batches: 20, dt, horizon: Some(50.0) };
        let est = estimate_jbar(&model, 0.0, 1.0, &rule, &mc, RngSpec::new(7, 0)).unwrap();
        println!("dt={dt:.0e}: jbar= {:.6} +- {:.2e} vs {:.6} -> {:.2} SE [{:?}]",
            est.value, est.stderr, exact, (est.value - exact).abs() / est.stderr, t.elapsed());
    }
    // nontrivial reflection point psi = 0.95 (inside the band)
    let mc = McSettings { n_paths: 100_000, n_batches: 20, dt: 1e-5, horizon: Some(50.0) };
    let a = estimate_jbar(&model, 0.0, 0.95, &rule, &mc, RngSpec::new(21, 0)).unwrap();
    let b = estimate_jbar(&model, 0.0, 1.0 / 0.95, &rule, &mc, RngSpec::new(22, 0)).unwrap();
    let lhs = (1.0 + 0.95) * a.value;
    let rhs = 0.95 * (1.0 + 1.0 / 0.95) * b.value;
    let comb = ((1.95 * a.stderr).powi(2) + (1.95 * b.stderr).powi(2)).sqrt();
    println!("reflection psi=0.95: {:.6} vs {:.6} ({:.2} comb SE)", lhs, rhs, (lhs - rhs).abs() / comb);
}
