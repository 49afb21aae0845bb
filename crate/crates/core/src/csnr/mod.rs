//! Constant signal-to-noise solver: the smooth-fit system for the
//! continuation band, the least favorable prior from the first-order
//! condition, and the piecewise closed form of the risk along a tuned rule.

mod m_eval;
mod solve;
mod ubar;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::expr::Expr;
use crate::scalar::Real;

pub use m_eval::MEvaluator;
pub use solve::{case1_gap, phi0_roots, solve_boundaries, solve_phi0, symmetric_shortcut};
pub use ubar::eval_ubar;

/// Running cost as a function of the likelihood ratio. The symmetric flag
/// asserts f(l) = f(1/l); it is validated on a 64-point log grid at
/// construction and gates the symmetric shortcut.
#[derive(Clone)]
pub struct RunningCostFn<T: Real> {
    eval: Arc<dyn Fn(T) -> T + Send + Sync>,
    symmetric: bool,
}

impl<T: Real> fmt::Debug for RunningCostFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunningCostFn")
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl<T: Real> RunningCostFn<T> {
    pub fn constant(c: T) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "constant running cost must be positive, got {}",
                c.as_f64()
            )));
        }
        Ok(Self {
            eval: Arc::new(move |_| c),
            symmetric: true,
        })
    }

    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static, symmetric: bool) -> Result<Self> {
        let out = Self {
            eval: Arc::new(f),
            symmetric,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn from_expr(src: &str, symmetric: bool) -> Result<Self> {
        let ast = Expr::parse(src)?;
        Self::new(move |l| ast.eval(l), symmetric)
    }

    fn validate(&self) -> Result<()> {
        let grid = crate::model::log_spaced(T::cast(0.02), T::cast(50.0), 64);
        for &l in &grid {
            let v = self.eval(l);
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "running cost must be positive, f({}) = {}",
                    l.as_f64(),
                    v.as_f64()
                )));
            }
            if self.symmetric {
                let w = self.eval(T::one() / l);
                let tol = T::cast(1e-12) * (T::one() + v.abs());
                if (v - w).abs() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "symmetric flag set but f({l0}) = {a} differs from f(1/{l0}) = {b}",
                        l0 = l.as_f64(),
                        a = v.as_f64(),
                        b = w.as_f64()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, l: T) -> T {
        (self.eval)(l)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Even part (f(l) + f(1/l)) / 2, used to seed the asymmetric solve.
    pub(crate) fn symmetrized(&self) -> Self {
        let f = self.eval.clone();
        Self {
            eval: Arc::new(move |l: T| (f(l) + f(T::one() / l)) * T::half()),
            symmetric: true,
        }
    }
}

/// Residuals of the smooth-fit system and side conditions, all of which are
/// checked before a solution is accepted.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitResiduals<T: Real> {
    pub value_lo: T,
    pub value_hi: T,
    pub slope_lo: T,
    pub slope_hi: T,
    /// max over a 256-point grid of W(l) - min(1, l); nonpositive up to
    /// tolerance when the obstacle inequality holds.
    pub obstacle_max: T,
    /// First-order-condition residual at phi0, when phi0 is attached.
    pub case1: Option<T>,
}

/// Solution of the constant-SNR band problem.
#[derive(Clone)]
pub struct CsnrSolution<T: Real> {
    pub rho0: T,
    pub f: RunningCostFn<T>,
    pub a: T,
    pub b: T,
    pub l0: T,
    pub l1: T,
    pub phi0: Option<T>,
    pub residuals: FitResiduals<T>,
}

impl<T: Real> fmt::Debug for CsnrSolution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CsnrSolution")
            .field("rho0", &self.rho0)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("l0", &self.l0)
            .field("l1", &self.l1)
            .field("phi0", &self.phi0)
            .finish()
    }
}

impl<T: Real> CsnrSolution<T> {
    pub fn evaluator(&self) -> MEvaluator<'_, T> {
        MEvaluator::new(self.rho0, &self.f)
    }

    /// Candidate value W(l) = M(l) + A l + B inside the band.
    pub fn w(&self, l: T) -> Result<T> {
        Ok(self.evaluator().m(l)? + self.a * l + self.b)
    }

    /// Serializable snapshot (the running cost itself is a closure; callers
    /// carry its descriptor separately).
    pub fn summary(&self) -> CsnrSummary<T> {
        CsnrSummary {
            rho0: self.rho0,
            a: self.a,
            b: self.b,
            l0: self.l0,
            l1: self.l1,
            phi0: self.phi0,
            residuals: self.residuals,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CsnrSummary<T: Real> {
    pub rho0: T,
    pub a: T,
    pub b: T,
    pub l0: T,
    pub l1: T,
    pub phi0: Option<T>,
    pub residuals: FitResiduals<T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_cost_is_symmetric() {
        let f = RunningCostFn::constant(2.0_f64).unwrap();
        assert!(f.is_symmetric());
        assert_eq!(f.eval(0.3), 2.0);
    }

    #[test]
    fn asymmetric_cost_with_symmetric_flag_is_rejected() {
        assert!(RunningCostFn::new(|l: f64| 2.0 * l, true).is_err());
        assert!(RunningCostFn::new(|l: f64| 2.0 * l, false).is_ok());
    }

    #[test]
    fn symmetric_combination_passes_validation() {
        let f = RunningCostFn::new(|l: f64| 0.5 * (l + 1.0 / l), true).unwrap();
        assert!(f.is_symmetric());
    }

    #[test]
    fn nonpositive_cost_is_rejected() {
        assert!(RunningCostFn::new(|l: f64| l - 1.0, false).is_err());
    }
}
