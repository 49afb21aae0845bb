//! Running-supremum machinery of the time-changed weighted likelihood.
//!
//! After the intrinsic time change the weighted likelihood is a
//! unit-volatility exponential martingale phi * exp(-t/2 + B_t), so
//! log(phi^{-1} sup_t Phi_t) is exponentially distributed with mean 1 over an
//! infinite horizon. This module provides the closed-form mean of the stopped
//! payoff supremum, its finite-horizon tail via Gauss-Hermite quadrature, an
//! exact sampler of the finite-horizon supremum (Brownian-bridge maxima, no
//! discretization bias), and the exact finite-horizon CDF used to correct
//! distribution tests for truncation.

use rand::Rng;

use super::{require_positive, RngSpec};
use crate::error::Result;
use crate::numerics::quad::gauss_hermite_96;
use crate::numerics::stats::normal_cdf;
use crate::scalar::Real;

/// Expected all-time supremum of min(1, Phi_t) started at `phi`:
/// 1 for phi >= 1, otherwise phi (1 - log phi), with value 0 at phi = 0.
pub fn h<T: Real>(phi: T) -> T {
    assert!(phi >= T::zero(), "phi must be nonnegative");
    if phi >= T::one() {
        T::one()
    } else if phi == T::zero() {
        T::zero()
    } else {
        phi * (T::one() - phi.ln())
    }
}

/// Tail of the payoff supremum beyond horizon `t`: the expectation of
/// h(Phi_t) over the lognormal law Phi_t = phi exp(-t/2 + sqrt(t) Z),
/// evaluated by 96-node Gauss-Hermite quadrature.
pub fn gamma<T: Real>(phi: T, t: T) -> T {
    assert!(phi > T::zero() && t > T::zero());
    let (nodes, weights) = gauss_hermite_96();
    let log_phi = phi.ln();
    let sqrt_t = t.sqrt();
    let sqrt2 = T::cast(std::f64::consts::SQRT_2);
    let inv_sqrt_pi = T::cast(1.0 / std::f64::consts::PI.sqrt());
    let mut acc = T::zero();
    for (&y, &w) in nodes.iter().zip(weights.iter()) {
        let z = sqrt2 * T::cast(y);
        let log_v = log_phi - t * T::half() + sqrt_t * z;
        // h on the log scale, guarding the exp against overflow to +inf.
        let hv = if log_v >= T::zero() {
            T::one()
        } else {
            let v = log_v.exp();
            v * (T::one() - log_v)
        };
        acc = acc + T::cast(w) * hv;
    }
    acc * inv_sqrt_pi
}

/// P(sup_{s <= t} (B_s - s/2) <= a) for a >= 0: the truncation-corrected law
/// of the log supremum; tends to the unit-mean exponential CDF as t grows.
pub fn sup_cdf(a: f64, t: f64) -> f64 {
    if a < 0.0 {
        return 0.0;
    }
    let st = t.sqrt();
    normal_cdf((a + 0.5 * t) / st) - (-a).exp() * normal_cdf((0.5 * t - a) / st)
}

/// Exact sample of sup_{s <= horizon} (B_s - s/2): endpoint recursion plus
/// the Brownian-bridge maximum over every step, so there is no monitoring
/// bias from the grid.
pub fn sample_sup_log<T: Real>(horizon: T, dt: T, rng: &mut impl Rng) -> T {
    let n_steps = (horizon / dt).as_f64().ceil().max(1.0) as usize;
    let step = horizon / T::cast(n_steps);
    let sqrt_dt = step.sqrt();
    let mut w = T::zero();
    let mut sup = T::zero();
    for _ in 0..n_steps {
        let z = T::standard_normal(rng);
        let w_new = w - step * T::half() + sqrt_dt * z;
        // max of a Brownian bridge from w to w_new over one step
        let u = T::uniform_open(rng);
        let d = w_new - w;
        let m = (w + w_new + (d * d - T::two() * step * u.ln()).sqrt()) * T::half();
        sup = sup.max(m);
        w = w_new;
    }
    sup
}

/// Batch of supremum samples; stream `b` of `rng` drives batch `b`.
pub fn sample_sup_log_batch<T: Real>(
    horizon: T,
    dt: T,
    n: usize,
    rng: RngSpec,
) -> Result<Vec<T>> {
    require_positive(horizon, "horizon")?;
    require_positive(dt, "dt")?;
    let mut r = rng.rng();
    Ok((0..n).map(|_| sample_sup_log(horizon, dt, &mut r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stats::{ks_critical, ks_statistic, mean_and_se};
    use approx::assert_relative_eq;

    #[test]
    fn h_reference_values() {
        assert_relative_eq!(h(1.0_f64), 1.0);
        assert_relative_eq!(h(2.5_f64), 1.0);
        assert_relative_eq!(h(0.5_f64), 0.8465735902799727, epsilon = 1e-12);
        assert_relative_eq!(h(0.0_f64), 0.0);
    }

    #[test]
    fn gamma_is_increasing_in_phi() {
        let t = 4.0_f64;
        let phis = [0.1, 0.25, 0.5, 1.0, 1.5, 2.0];
        for w in phis.windows(2) {
            assert!(
                gamma(w[0], t) < gamma(w[1], t) + 1e-12,
                "gamma not increasing between {} and {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn gamma_vanishes_for_long_horizons() {
        assert!(gamma(0.5_f64, 100.0) < 1e-6);
        assert!(gamma(0.5_f64, 100.0) >= 0.0);
    }

    #[test]
    fn gamma_is_dominated_by_h() {
        for &phi in &[0.1_f64, 0.3, 0.7, 1.0, 1.6] {
            for &t in &[0.25_f64, 1.0, 4.0, 16.0] {
                assert!(gamma(phi, t) <= h(phi) + 1e-10, "phi={phi} t={t}");
            }
        }
    }

    #[test]
    fn sup_cdf_limits() {
        assert_relative_eq!(sup_cdf(0.0, 5.0), 0.0, epsilon = 1e-12);
        // long horizon: exponential law
        for &a in &[0.5, 1.0, 2.0] {
            assert_relative_eq!(sup_cdf(a, 5000.0), 1.0 - (-a as f64).exp(), epsilon = 1e-6);
        }
        // monotone in a
        assert!(sup_cdf(0.5, 10.0) < sup_cdf(1.0, 10.0));
    }

    #[test]
    fn bridge_sampled_supremum_matches_exact_law() {
        // KS of 20000 exact samples against the finite-horizon CDF.
        let horizon = 20.0_f64;
        let mut samples = sample_sup_log_batch(horizon, 0.25, 20_000, RngSpec::new(99, 0)).unwrap();
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_statistic(&samples, |a| sup_cdf(a, horizon));
        let crit = ks_critical(samples.len(), 0.01);
        assert!(d < crit, "KS statistic {d} exceeds critical {crit}");
    }

    #[test]
    fn truncated_supremum_mean_approaches_h() {
        // E[min(1, 0.5 e^S)] with S the horizon-20 supremum: within
        // 4 SE + gamma(0.5, 20) of h(0.5).
        let horizon = 20.0_f64;
        let phi = 0.5_f64;
        let mut batch_means = Vec::new();
        for b in 0..20 {
            let samples =
                sample_sup_log_batch(horizon, 0.25, 2_000, RngSpec::new(101, b)).unwrap();
            let m: f64 = samples
                .iter()
                .map(|&s| (phi * s.exp()).min(1.0))
                .sum::<f64>()
                / samples.len() as f64;
            batch_means.push(m);
        }
        let (m, se) = mean_and_se(&batch_means);
        let slack = 4.0 * se + gamma(phi, horizon);
        assert!(
            (m - h(phi)).abs() <= slack,
            "estimate {m} +- {se} vs h = {} (slack {slack})",
            h(phi)
        );
    }
}
