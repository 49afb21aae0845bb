//! Sample statistics: batch means, normal CDF, Kolmogorov–Smirnov helpers.

use crate::scalar::Real;

/// Mean and standard error of the mean from a list of batch means.
pub fn mean_and_se<T: Real>(batch_means: &[T]) -> (T, T) {
    let n = batch_means.len();
    assert!(n >= 1);
    let nt = T::cast(n);
    let mean = batch_means.iter().fold(T::zero(), |a, &b| a + b) / nt;
    if n == 1 {
        return (mean, T::zero());
    }
    let var = batch_means
        .iter()
        .fold(T::zero(), |a, &b| a + (b - mean) * (b - mean))
        / T::cast(n - 1);
    (mean, (var / nt).sqrt())
}

/// Complementary error function, Chebyshev fit (fractional error < 1.2e-7).
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against the CDF `f`.
/// `samples` must be sorted ascending.
pub fn ks_statistic(samples: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = f(x);
        let lo = i as f64 / n;
        let hi = (i as f64 + 1.0) / n;
        d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    d
}

/// Asymptotic critical value of the two-sided KS statistic at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ((-0.5 * (alpha / 2.0).ln()) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn batch_means_reduce() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(m, 2.5);
        // sample sd = sqrt(5/3), se = sd/2
        assert_relative_eq!(se, (5.0_f64 / 3.0).sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_relative_eq!(normal_cdf(0.0), 0.5, epsilon = 2e-7);
        assert_relative_eq!(normal_cdf(1.0), 0.841344746068543, epsilon = 2e-7);
        assert_relative_eq!(normal_cdf(-1.96), 0.024997895148220435, epsilon = 2e-7);
    }

    #[test]
    fn ks_statistic_detects_shift() {
        // uniform samples against the uniform CDF: D small; against a shifted
        // CDF: D large.
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d_ok = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
        assert!(d_ok < 0.002);
        let d_bad = ks_statistic(&samples, |x| (x * x).clamp(0.0, 1.0));
        assert!(d_bad > 0.2);
    }

    #[test]
    fn ks_critical_matches_tables() {
        // alpha = 0.01 -> c(alpha) ~ 1.628 / sqrt(n)
        assert_relative_eq!(ks_critical(100, 0.01) * 10.0, 1.6276, epsilon = 1e-3);
    }
}
