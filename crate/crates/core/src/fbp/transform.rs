//! State coordinate with unit-correlated noise: F(x) with F' = rho/sigma,
//! anchored at the left edge of the solver window. Built by panel-wise
//! Gauss-Kronrod quadrature on a refined table and interpolated linearly.

use crate::error::{Error, Result};
use crate::model::DiffusionModel;
use crate::numerics::{interp, quad};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct StateMap<T: Real> {
    xs: Vec<T>,
    ss: Vec<T>,
}

impl<T: Real> StateMap<T> {
    /// Tabulates F over the span of `x_nodes` with 4x subpanel refinement.
    pub fn build(model: &DiffusionModel<T>, x_nodes: &[T]) -> Result<Self> {
        assert!(x_nodes.len() >= 2);
        let integrand = |y: T| {
            let s = model.sigma().eval(y);
            (model.mu1().eval(y) - model.mu0().eval(y)) / (s * s)
        };
        let mut xs = Vec::with_capacity(4 * (x_nodes.len() - 1) + 1);
        xs.push(x_nodes[0]);
        for w in x_nodes.windows(2) {
            for k in 1..=4usize {
                xs.push(w[0] + (w[1] - w[0]) * T::cast(k) / T::cast(4.0));
            }
        }
        let mut ss = Vec::with_capacity(xs.len());
        let mut acc = T::zero();
        ss.push(acc);
        for w in xs.windows(2) {
            let piece = quad::adaptive(integrand, w[0], w[1], T::cast(1e-13))?;
            if !(piece > T::zero()) {
                return Err(Error::DegenerateModel(format!(
                    "rho/sigma is not positive near x = {}; relabel the hypotheses so that mu1 > mu0",
                    w[0].as_f64()
                )));
            }
            acc = acc + piece;
            ss.push(acc);
        }
        Ok(Self { xs, ss })
    }

    pub fn forward(&self, x: T) -> T {
        interp::linear(&self.xs, &self.ss, x)
    }

    pub fn inverse(&self, s: T) -> T {
        interp::inverse_linear(&self.xs, &self.ss, s)
    }

    pub fn span(&self) -> (T, T) {
        (self.ss[0], *self.ss.last().expect("nonempty"))
    }

    pub fn x_range(&self) -> (T, T) {
        (self.xs[0], *self.xs.last().expect("nonempty"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_bessel, builtin_constant, log_spaced};
    use approx::assert_relative_eq;

    #[test]
    fn constant_model_coordinate_is_identity_shift() {
        let m = builtin_constant(0.0, 1.0, 1.0).unwrap();
        let nodes: Vec<f64> = crate::model::lin_spaced(-2.0, 3.0, 21);
        let map = StateMap::build(&m, &nodes).unwrap();
        assert_relative_eq!(map.forward(1.0), 3.0, epsilon = 1e-10);
        assert_relative_eq!(map.inverse(3.0), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bessel_coordinate_is_logarithmic() {
        // F(x) = ((delta1 - delta0)/2) ln(x / x_lo) for unit sigma.
        let m = builtin_bessel(3.0, 4.0).unwrap();
        let nodes: Vec<f64> = log_spaced(0.25, 8.0, 33);
        let map = StateMap::build(&m, &nodes).unwrap();
        for &x in &[0.5, 1.0, 4.0] {
            assert_relative_eq!(map.forward(x), 0.5 * (x / 0.25_f64).ln(), epsilon = 1e-4);
            assert_relative_eq!(map.inverse(map.forward(x)), x, max_relative = 1e-7);
            // table nodes themselves are quadrature-exact
        }
        for &x in &nodes {
            assert_relative_eq!(
                map.forward(x),
                0.5 * (x / 0.25_f64).ln(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn rejects_reversed_drift_ordering() {
        let m = builtin_constant(1.0, 0.0, 1.0);
        // builtin_constant itself allows mu0 > mu1; the map rejects it.
        let m = m.unwrap();
        let nodes: Vec<f64> = crate::model::lin_spaced(-1.0, 1.0, 17);
        assert!(StateMap::build(&m, &nodes).is_err());
    }
}
