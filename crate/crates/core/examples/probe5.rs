use seqtest::csnr::{eval_ubar, solve_boundaries, solve_phi0, RunningCostFn};
use seqtest::fbp::{extract_boundaries, solve_vi, Grid2D, SolveParams, BoundaryPair};
use seqtest::minimax::{find_lfd, verify_saddle, LfdSettings};
use seqtest::model::{builtin_bessel, builtin_constant};
use seqtest::risk::{estimate_jbar, estimate_jbar_mixture};
use seqtest::simulate::{McSettings, RngSpec, StoppingRule};

fn main() {
    let model: seqtest::Model = builtin_constant(0.0, 1.0, 1.0).unwrap();
    let mut sol: seqtest::BandSolution = solve_boundaries(1.0, &RunningCostFn::constant(1.0).unwrap()).unwrap();
    sol.phi0 = Some(solve_phi0(&sol).unwrap());
    let pair = BoundaryPair::constant(-50.0, 50.0, sol.l0, sol.l1);
    let mc = McSettings { n_paths: 50_000, n_batches: 20, dt: 1e-4, horizon: Some(50.0) };

    // risk at psi=1 vs closed form
    let t = std::time::Instant::now();
    let rule = StoppingRule::from_pair(&pair);
    let est = estimate_jbar(&model, 0.0, 1.0, &rule, &mc, RngSpec::new(7, 0)).unwrap();
    let exact = eval_ubar(&sol, 1.0, 1.0).unwrap();
    println!("jbar(1) = {:.6} +- {:.2e} vs closed {:.6}  ({:.1} SE) [{:?}]",
        est.value, est.stderr, exact, (est.value - exact).abs() / est.stderr, t.elapsed());

    // duality
    for &psi in &[0.5, 1.0, 2.0] {
        let a = estimate_jbar(&model, 0.0, psi, &rule, &mc, RngSpec::new(8, 0)).unwrap();
        let b = estimate_jbar_mixture(&model, 0.0, psi, &rule, &mc, RngSpec::new(9, 0)).unwrap();
        let comb = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        println!("duality psi={psi}: {:.6} vs {:.6} ({:.2} comb SE)", a.value, b.value, (a.value-b.value).abs()/comb);
    }

    // reflection: (1+psi) J(psi) symmetric
    let a = estimate_jbar(&model, 0.0, 0.5, &rule, &mc, RngSpec::new(10, 0)).unwrap();
    let b = estimate_jbar(&model, 0.0, 2.0, &rule, &mc, RngSpec::new(11, 0)).unwrap();
    let lhs = 1.5 * a.value; let rhs = 2.0 * (1.0 + 0.5) * b.value;
    let comb = (1.5*1.5*a.stderr.powi(2) + 9.0*b.stderr.powi(2)).sqrt();
    println!("reflection: (1+0.5)J(0.5)={:.6} vs 2(1+1/2)J(2)={:.6} ({:.2} comb SE)", lhs, rhs, (lhs-rhs).abs()/comb);

    // saddle
    let t = std::time::Instant::now();
    let rep = verify_saddle(&model, 0.0, 1.0, &pair, &[0.25, 0.5, 0.8, 1.25, 2.0, 4.0], &mc, RngSpec::new(12, 0)).unwrap();
    println!("saddle pass={} at_phi0={:.6} [{:?}]", rep.pass, rep.at_phi0.value, t.elapsed());
    for e in &rep.entries {
        println!("  psi={:.2} J={:.6}+-{:.1e} pass={}", e.psi, e.estimate.value, e.estimate.stderr, e.pass);
    }
    for e in &rep.perturbed {
        println!("  tuned@{:.3} J={:.6} pass={}", e.psi, e.estimate.value, e.pass);
    }

    // Bessel lfd (criterion 6 scale)
    let t = std::time::Instant::now();
    let bmodel: seqtest::Model = builtin_bessel(3.0, 4.0).unwrap();
    let grid: seqtest::Grid = Grid2D::regular(0.3, 2.2, 201, -1.0, 1.0, 513, true).unwrap();
    let surf = solve_vi(&bmodel, &grid, &SolveParams::default()).unwrap();
    let bpair = extract_boundaries(&surf, 2e-7).unwrap();
    let bmc = McSettings { n_paths: 50_000, n_batches: 20, dt: 1e-5, horizon: Some(2000.0) };
    let lfd = find_lfd(&bmodel, 1.0, &bpair, &LfdSettings::default(), &bmc, RngSpec::new(13, 0)).unwrap();
    println!("bessel lfd [{:?}]: bracket ({:.5},{:.5})", t.elapsed(), lfd.bracket.0, lfd.bracket.1);
    for r in &lfd.roots { println!("  root {:.6} resid {:+.3e} se {:.1e}", r.phi0, r.residual, r.stderr); }
    println!("  endpoints {:+.4} {:+.4}", lfd.endpoint_checks.0, lfd.endpoint_checks.1);
    let t = std::time::Instant::now();
    let srep = verify_saddle(&bmodel, 1.0, lfd.roots[0].phi0, &bpair, &[0.5, 0.8, 1.25, 2.0], &bmc, RngSpec::new(14, 0)).unwrap();
    println!("bessel saddle pass={} [{:?}]", srep.pass, t.elapsed());
    for e in &srep.entries { println!("  psi={:.2} J={:.6} pass={}", e.psi, e.estimate.value, e.pass); }
}
