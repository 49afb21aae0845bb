//! Intrinsic clock of the detection problem: the cumulative integral of
//! rho^2 along a path, with both directions of the reparameterization.

use super::PathSample;
use crate::error::Result;
use crate::model::DiffusionModel;
use crate::numerics::interp;
use crate::scalar::Real;

/// Table of (physical time, integrated rho^2) along one path.
#[derive(Debug, Clone)]
pub struct TimeChange<T: Real> {
    pub times: Vec<T>,
    pub integrated: Vec<T>,
}

impl<T: Real> TimeChange<T> {
    /// A_s: intrinsic time elapsed by physical time s.
    pub fn forward(&self, s: T) -> T {
        interp::linear(&self.times, &self.integrated, s)
    }

    /// T_t: physical time at which the intrinsic clock reads t.
    pub fn inverse(&self, t: T) -> T {
        interp::inverse_linear(&self.times, &self.integrated, t)
    }
}

/// Trapezoidal cumulative integral of rho^2(X) on the path grid.
pub fn time_change_grid<T: Real>(
    model: &DiffusionModel<T>,
    path: &PathSample<T>,
) -> Result<TimeChange<T>> {
    let n = path.len();
    let mut integrated = Vec::with_capacity(n);
    let mut acc = T::zero();
    integrated.push(acc);
    let mut prev = model.rho_sq(path.x[0])?;
    for i in 1..n {
        let cur = model.rho_sq(path.x[i])?;
        let dt = path.times[i] - path.times[i - 1];
        acc = acc + (prev + cur) * T::half() * dt;
        integrated.push(acc);
        prev = cur;
    }
    Ok(TimeChange {
        times: path.times.clone(),
        integrated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_bessel, builtin_constant};
    use crate::simulate::Measure;
    use approx::assert_relative_eq;

    fn frozen_path(x: f64, n: usize, dt: f64) -> PathSample<f64> {
        PathSample {
            times: (0..=n).map(|i| i as f64 * dt).collect(),
            x: vec![x; n + 1],
            log_l: vec![0.0; n + 1],
            measure: Measure::Null,
            exit_index: None,
        }
    }

    #[test]
    fn constant_snr_clock_is_linear() {
        let model = builtin_constant(0.0, 0.5, 1.0).unwrap(); // rho^2 = 0.25
        let path = frozen_path(0.0, 100, 0.01);
        let tc = time_change_grid(&model, &path).unwrap();
        assert_relative_eq!(tc.forward(1.0), 0.25, epsilon = 1e-12);
        assert_relative_eq!(tc.forward(0.4), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn frozen_bessel_clock_scales_with_state() {
        // rho^2(2) = 1/16 for the (3, 4) pair.
        let model = builtin_bessel(3.0, 4.0).unwrap();
        let path = frozen_path(2.0, 64, 0.05);
        let tc = time_change_grid(&model, &path).unwrap();
        let s = 64.0 * 0.05;
        assert_relative_eq!(tc.forward(s), s / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn forward_and_inverse_compose_to_identity() {
        let model = builtin_bessel(3.0, 4.0).unwrap();
        let rng = crate::simulate::RngSpec::new(30, 0);
        let path = crate::simulate::simulate_joint(&model, 1.0, 1e-3, 1.0, rng).unwrap();
        let tc = time_change_grid(&model, &path).unwrap();
        for &s in &[0.1, 0.25, 0.5, 0.9] {
            let t = tc.forward(s);
            assert_relative_eq!(tc.inverse(t), s, epsilon = 1e-9);
        }
    }
}
