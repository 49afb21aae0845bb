//! Solvers for the smooth-fit system and the least-favorable-prior
//! first-order condition.

use super::{CsnrSolution, FitResiduals, MEvaluator, RunningCostFn};
use crate::error::{Error, Result};
use crate::numerics::{linalg, rootfind};
use crate::scalar::Real;

const FIT_TOL: f64 = 1e-9;

/// Smooth-fit system residuals at (a, b, l0, l1):
/// value matching at both edges and slope matching 1 / 0.
fn system_residuals<T: Real>(
    ev: &MEvaluator<'_, T>,
    a: T,
    b: T,
    l0: T,
    l1: T,
) -> Result<[T; 4]> {
    Ok([
        ev.m(l0)? + a * l0 + b - l0,
        ev.m(l1)? + a * l1 + b - T::one(),
        ev.m_prime(l0)? + a - T::one(),
        ev.m_prime(l1)? + a,
    ])
}

fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Obstacle scan: max of W(l) - min(1, l) over a 256-point grid of (l0, l1).
fn obstacle_max<T: Real>(ev: &MEvaluator<'_, T>, a: T, b: T, l0: T, l1: T) -> Result<T> {
    let n = 256;
    let mut worst = T::neg_infinity();
    for i in 0..n {
        let t = T::cast(i) / T::cast(n - 1);
        let l = l0 + (l1 - l0) * t;
        let w = ev.m(l)? + a * l + b;
        worst = worst.max(w - l.min(T::one()));
    }
    Ok(worst)
}

/// Reduced symmetric equation: with l0 = 1/l1 = e^{-s}, the two slope
/// conditions collapse to M'(e^{-s}) - M'(e^{s}) = 1.
fn symmetric_band_halfwidth<T: Real>(ev: &MEvaluator<'_, T>) -> Result<T> {
    let r = |s: T| {
        let l0 = (-s).exp();
        let l1 = s.exp();
        match (ev.m_prime(l0), ev.m_prime(l1)) {
            (Ok(a), Ok(b)) => a - b - T::one(),
            _ => T::nan(),
        }
    };
    rootfind::bisect_expanding(r, T::cast(1e-9), T::cast(0.05), T::cast(1e-13), 60)
}

fn build_solution<T: Real>(
    rho0: T,
    f: RunningCostFn<T>,
    a: T,
    b: T,
    l0: T,
    l1: T,
) -> Result<CsnrSolution<T>> {
    let ev = MEvaluator::new(rho0, &f);
    let res = system_residuals(&ev, a, b, l0, l1)?;
    let fit_tol = T::cast(FIT_TOL);
    if norm_inf(&res) > fit_tol {
        return Err(Error::NoSolution(format!(
            "smooth-fit residuals {:?} exceed {FIT_TOL}",
            res.map(|r| r.as_f64())
        )));
    }
    if !(l0 > T::zero() && l0 < T::one() && l1 > T::one()) {
        return Err(Error::NoSolution(format!(
            "band ({}, {}) does not straddle 1",
            l0.as_f64(),
            l1.as_f64()
        )));
    }
    let obstacle = obstacle_max(&ev, a, b, l0, l1)?;
    if obstacle > fit_tol {
        return Err(Error::NoSolution(format!(
            "candidate value exceeds the payoff by {}",
            obstacle.as_f64()
        )));
    }
    Ok(CsnrSolution {
        rho0,
        f,
        a,
        b,
        l0,
        l1,
        phi0: None,
        residuals: FitResiduals {
            value_lo: res[0],
            value_hi: res[1],
            slope_lo: res[2],
            slope_hi: res[3],
            obstacle_max: obstacle,
            case1: None,
        },
    })
}

/// Solves the four smooth-fit equations for (A, B, l0, l1) by damped Newton
/// with the analytic Jacobian, seeded from the symmetric reduction of the
/// even part of the cost. Solutions violating the obstacle inequality are
/// rejected.
pub fn solve_boundaries<T: Real>(rho0: T, f: &RunningCostFn<T>) -> Result<CsnrSolution<T>> {
    if !(rho0 > T::zero()) {
        return Err(Error::InvalidArgument("rho0 must be positive".into()));
    }
    let ev = MEvaluator::new(rho0, f);

    // Symmetric seed.
    let f_even = f.symmetrized();
    let ev_even = MEvaluator::new(rho0, &f_even);
    let s = symmetric_band_halfwidth(&ev_even)?;
    let mut l0 = (-s).exp();
    let mut l1 = s.exp();
    let mut a = -ev.m_prime(l1)?;
    let mut b = T::one() - ev.m(l1)? - a * l1;

    let mut best: Option<(T, [T; 4], [T; 4])> = None;
    let mut fv = system_residuals(&ev, a, b, l0, l1)?;
    for _ in 0..100 {
        let fnorm = norm_inf(&fv);
        if best.as_ref().is_none_or(|(bn, _, _)| fnorm < *bn) {
            best = Some((fnorm, [a, b, l0, l1], fv));
        }
        if fnorm <= T::cast(1e-12) {
            break;
        }
        // Jacobian rows with respect to (a, b, l0, l1).
        let mp0 = ev.m_prime(l0)?;
        let mp1 = ev.m_prime(l1)?;
        let ms0 = ev.m_second(l0)?;
        let ms1 = ev.m_second(l1)?;
        let mut jac = [
            l0,
            T::one(),
            mp0 + a - T::one(),
            T::zero(),
            l1,
            T::one(),
            T::zero(),
            mp1 + a,
            T::one(),
            T::zero(),
            ms0,
            T::zero(),
            T::one(),
            T::zero(),
            T::zero(),
            ms1,
        ];
        let mut step = [-fv[0], -fv[1], -fv[2], -fv[3]];
        linalg::solve_dense(&mut jac, &mut step)?;

        // Damped update keeping the band on the right side of 1.
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let cand = [
                a + lambda * step[0],
                b + lambda * step[1],
                l0 + lambda * step[2],
                l1 + lambda * step[3],
            ];
            let feasible = cand[2] > T::cast(1e-9)
                && cand[2] < T::one() - T::cast(1e-12)
                && cand[3] > T::one() + T::cast(1e-12)
                && cand[3].is_finite();
            if feasible {
                let cand_fv = system_residuals(&ev, cand[0], cand[1], cand[2], cand[3])?;
                if norm_inf(&cand_fv) < fnorm {
                    a = cand[0];
                    b = cand[1];
                    l0 = cand[2];
                    l1 = cand[3];
                    fv = cand_fv;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda * T::half();
        }
        if !accepted {
            break;
        }
    }

    let (_, [a, b, l0, l1], _) = best.ok_or_else(|| Error::NoSolution("Newton stalled".into()))?;
    build_solution(rho0, f.clone(), a, b, l0, l1)
}

/// Reduced solve under the symmetry f(l) = f(1/l): pins l0 = 1/l1 and the
/// least favorable prior at 1, then verifies the full system.
pub fn symmetric_shortcut<T: Real>(rho0: T, f: &RunningCostFn<T>) -> Result<CsnrSolution<T>> {
    if !f.is_symmetric() {
        return Err(Error::InvalidArgument(
            "symmetric shortcut requires a cost with the symmetric flag".into(),
        ));
    }
    let ev = MEvaluator::new(rho0, f);
    let s = symmetric_band_halfwidth(&ev)?;
    let l0 = (-s).exp();
    let l1 = s.exp();
    let a = -ev.m_prime(l1)?;
    let b = T::one() - ev.m(l1)? - a * l1;
    let mut sol = build_solution(rho0, f.clone(), a, b, l0, l1)?;
    let gap = case1_gap(&sol, T::one())?;
    if gap.abs() > T::cast(FIT_TOL) {
        return Err(Error::NoSolution(format!(
            "first-order condition at 1 off by {}",
            gap.as_f64()
        )));
    }
    sol.phi0 = Some(T::one());
    sol.residuals.case1 = Some(gap);
    Ok(sol)
}

/// First-order-condition gap at prior odds `phi`: zero exactly at a least
/// favorable prior, +1 at the lower band edge and -1 at the upper one.
pub fn case1_gap<T: Real>(sol: &CsnrSolution<T>, phi: T) -> Result<T> {
    if !(phi > T::zero()) {
        return Err(Error::InvalidArgument("phi must be positive".into()));
    }
    let ev = sol.evaluator();
    let (l0, l1) = (sol.l0, sol.l1);
    let width = l1 - l0;
    let lhs = l0 * (l1 - phi) / (phi * width)
        + l1 * (phi - l0) / (phi * width) * ev.m(phi / l1)?
        + l0 * (l1 - phi) / (phi * width) * ev.m(phi / l0)?;
    let rhs = (phi - l0) / width
        + (phi - l0) / width * ev.m(l1 / phi)?
        + (l1 - phi) / width * ev.m(l0 / phi)?;
    Ok(lhs - rhs)
}

/// Principal root of the first-order condition inside the band, by bisection
/// to relative width 1e-12 after checking the endpoint sign pattern.
pub fn solve_phi0<T: Real>(sol: &CsnrSolution<T>) -> Result<T> {
    let at_l0 = case1_gap(sol, sol.l0)?;
    let at_l1 = case1_gap(sol, sol.l1)?;
    if !(at_l0 > T::zero()) || !(at_l1 < T::zero()) {
        return Err(Error::SignPattern(format!(
            "first-order gap is {} at l0 and {} at l1; expected +1 and -1",
            at_l0.as_f64(),
            at_l1.as_f64()
        )));
    }
    let gap = |phi: T| case1_gap(sol, phi).unwrap_or_else(|_| T::nan());
    rootfind::bisect(gap, sol.l0, sol.l1, T::cast(1e-12), 400)
}

/// All sign-change roots of the first-order condition on a 257-point scan of
/// the band; the mean-value argument guarantees at least one.
pub fn phi0_roots<T: Real>(sol: &CsnrSolution<T>) -> Result<Vec<T>> {
    let n = 257;
    let gap = |phi: T| case1_gap(sol, phi).unwrap_or_else(|_| T::nan());
    let mut roots = Vec::new();
    let mut prev_phi = sol.l0;
    let mut prev_val = gap(prev_phi);
    for i in 1..n {
        let t = T::cast(i) / T::cast(n - 1);
        let phi = sol.l0 + (sol.l1 - sol.l0) * t;
        let val = gap(phi);
        if (prev_val > T::zero()) != (val > T::zero()) {
            roots.push(rootfind::bisect(gap, prev_phi, phi, T::cast(1e-12), 400)?);
        }
        prev_phi = phi;
        prev_val = val;
    }
    if roots.is_empty() {
        return Err(Error::SignPattern(
            "no sign change of the first-order condition inside the band".into(),
        ));
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_solution() -> CsnrSolution<f64> {
        solve_boundaries(1.0, &RunningCostFn::constant(1.0).unwrap()).unwrap()
    }

    /// Independent oracle for rho0 = 1, f = 1: the symmetric reduction
    /// collapses to 4 sinh(s) + 4 s = 1 for the half-width s of the log band.
    fn oracle_halfwidth() -> f64 {
        let f = |s: f64| 4.0 * s.sinh() + 4.0 * s - 1.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn unit_cost_band_matches_independent_reduction() {
        let sol = unit_solution();
        let s = oracle_halfwidth();
        assert_relative_eq!(sol.l1, s.exp(), epsilon = 1e-9);
        assert_relative_eq!(sol.l0, (-s).exp(), epsilon = 1e-9);
        assert!((sol.l0 * sol.l1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn smooth_fit_residuals_are_tiny() {
        let sol = unit_solution();
        assert!(sol.residuals.value_lo.abs() <= 1e-9);
        assert!(sol.residuals.value_hi.abs() <= 1e-9);
        assert!(sol.residuals.slope_lo.abs() <= 1e-9);
        assert!(sol.residuals.slope_hi.abs() <= 1e-9);
        assert!(sol.residuals.obstacle_max <= 1e-9);
    }

    #[test]
    fn scaling_cost_by_rho_squared_is_invariant() {
        // Only f / rho0^2 enters the curvature.
        let a = solve_boundaries(0.5, &RunningCostFn::constant(2.0).unwrap()).unwrap();
        let b = solve_boundaries(1.0, &RunningCostFn::constant(8.0).unwrap()).unwrap();
        assert_relative_eq!(a.l0, b.l0, epsilon = 1e-9);
        assert_relative_eq!(a.l1, b.l1, epsilon = 1e-9);
        assert_relative_eq!(a.a, b.a, epsilon = 1e-9);
        assert_relative_eq!(a.b, b.b, epsilon = 1e-9);
    }

    #[test]
    fn expensive_observation_shrinks_the_band() {
        let mut widths = Vec::new();
        let mut prev_l0 = 0.0;
        let mut prev_l1 = f64::INFINITY;
        for &c in &[1.0, 10.0, 100.0] {
            let sol = solve_boundaries(1.0, &RunningCostFn::constant(c).unwrap()).unwrap();
            assert!(sol.l0 > prev_l0 && sol.l1 < prev_l1, "c = {c}");
            prev_l0 = sol.l0;
            prev_l1 = sol.l1;
            widths.push(sol.l1 - sol.l0);
        }
        assert!(widths[0] > widths[1] && widths[1] > widths[2]);
    }

    #[test]
    fn endpoint_gaps_are_plus_minus_one() {
        let sol = unit_solution();
        assert_relative_eq!(case1_gap(&sol, sol.l0).unwrap(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(case1_gap(&sol, sol.l1).unwrap(), -1.0, epsilon = 1e-9);
    }

    #[test]
    fn symmetric_prior_is_one() {
        let sol = unit_solution();
        let phi0 = solve_phi0(&sol).unwrap();
        assert!((phi0 - 1.0).abs() < 1e-10, "phi0 = {phi0}");
        let roots = phi0_roots(&sol).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn shortcut_and_general_path_agree() {
        let f = RunningCostFn::constant(1.0).unwrap();
        let short = symmetric_shortcut(1.0, &f).unwrap();
        let long = unit_solution();
        assert_relative_eq!(short.l0, long.l0, epsilon = 1e-8);
        assert_relative_eq!(short.l1, long.l1, epsilon = 1e-8);
        assert_relative_eq!(short.a, long.a, epsilon = 1e-8);
        assert_relative_eq!(short.b, long.b, epsilon = 1e-8);
        assert_eq!(short.phi0, Some(1.0));
        let phi0 = solve_phi0(&long).unwrap();
        assert!((phi0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn shortcut_requires_symmetric_flag() {
        let f = RunningCostFn::new(|l: f64| 1.0 + 0.1 * l, false).unwrap();
        assert!(matches!(
            symmetric_shortcut(1.0, &f),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn symmetric_nonconstant_cost_keeps_prior_at_one() {
        let f = RunningCostFn::new(|l: f64| 0.5 * (l + 1.0 / l), true).unwrap();
        let sol = symmetric_shortcut(1.0, &f).unwrap();
        assert_eq!(sol.phi0, Some(1.0));
        assert!((sol.l0 * sol.l1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mildly_asymmetric_cost_solves_and_shifts_prior() {
        let f = RunningCostFn::new(|l: f64| 1.0 + 0.2 * l / (1.0 + l), false).unwrap();
        let sol = solve_boundaries(1.0, &f).unwrap();
        assert!(sol.l0 < 1.0 && sol.l1 > 1.0);
        let phi0 = solve_phi0(&sol).unwrap();
        assert!(phi0 > sol.l0 && phi0 < sol.l1);
    }

    #[test]
    fn band_ode_collocation_residual() {
        // (rho0^2 / 2) l^2 W'' + (1 + l) f = 0 on 64 interior points, using
        // the evaluator's curvature (the quadrature route is checked against
        // the closed form elsewhere).
        let sol = unit_solution();
        let ev = sol.evaluator();
        for i in 0..64 {
            let t = (i as f64 + 0.5) / 64.0;
            let l = sol.l0 + (sol.l1 - sol.l0) * t;
            let resid = 0.5 * l * l * ev.m_second(l).unwrap() + (1.0 + l) * 1.0;
            assert!(resid.abs() <= 1e-8, "residual {resid} at l = {l}");
        }
    }
}
