//! Particular solutions of the band ODE family
//! (rho0^2 / 2) l^2 Y''(l) + g(l) = 0 with Y(1) = Y'(1) = 0,
//! evaluated by adaptive Gauss-Kronrod quadrature. Integrating by parts once
//! collapses the double integral: Y(l) = int_1^l (l - v) Y''(v) dv and
//! Y'(l) = int_1^l Y''(v) dv.
//!
//! Three right-hand sides appear: g = (1 + l) f(l) drives the candidate band
//! value, and the split pieces g = f(l) and g = l f(l) isolate the
//! reference-measure and alternative-measure waiting costs in the closed
//! risk formula.

use super::RunningCostFn;
use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::scalar::Real;

const ABS_TOL: f64 = 1e-12;
const FLOOR: f64 = 1e-12;

#[derive(Clone, Copy)]
enum Rhs {
    /// (1 + l) f(l): the combined running cost of the band problem.
    Combined,
    /// f(l): reference-measure share.
    Plain,
    /// l f(l): alternative-measure share.
    Tilted,
}

pub struct MEvaluator<'a, T: Real> {
    rho0: T,
    f: &'a RunningCostFn<T>,
}

impl<'a, T: Real> MEvaluator<'a, T> {
    pub fn new(rho0: T, f: &'a RunningCostFn<T>) -> Self {
        assert!(rho0 > T::zero(), "rho0 must be positive");
        Self { rho0, f }
    }

    fn check(&self, l: T) -> Result<()> {
        if !(l >= T::cast(FLOOR) && l.is_finite()) {
            return Err(Error::Quadrature(format!(
                "argument {} below the evaluation floor {FLOOR}",
                l.as_f64()
            )));
        }
        Ok(())
    }

    fn curvature(&self, rhs: Rhs, v: T) -> T {
        let r2 = self.rho0 * self.rho0;
        let weight = match rhs {
            Rhs::Combined => T::one() + v,
            Rhs::Plain => T::one(),
            Rhs::Tilted => v,
        };
        -T::two() * weight * self.f.eval(v) / (r2 * v * v)
    }

    fn value(&self, rhs: Rhs, l: T) -> Result<T> {
        self.check(l)?;
        quad::adaptive(
            move |v: T| (l - v) * self.curvature(rhs, v),
            T::one(),
            l,
            T::cast(ABS_TOL),
        )
    }

    fn slope(&self, rhs: Rhs, l: T) -> Result<T> {
        self.check(l)?;
        quad::adaptive(
            move |v: T| self.curvature(rhs, v),
            T::one(),
            l,
            T::cast(ABS_TOL),
        )
    }

    /// M with the combined weight (1 + l) f(l).
    pub fn m(&self, l: T) -> Result<T> {
        self.value(Rhs::Combined, l)
    }

    pub fn m_prime(&self, l: T) -> Result<T> {
        self.slope(Rhs::Combined, l)
    }

    /// Closed-form second derivative of the combined M.
    pub fn m_second(&self, l: T) -> Result<T> {
        self.check(l)?;
        Ok(self.curvature(Rhs::Combined, l))
    }

    /// Cost potential for the weight f(l) alone: the expected
    /// reference-measure waiting cost to exit (a, b) is
    /// -(p m_plain(b) + (1 - p) m_plain(a)).
    pub fn m_plain(&self, l: T) -> Result<T> {
        self.value(Rhs::Plain, l)
    }

    /// Cost potential for the weight l f(l): the alternative-measure share.
    pub fn m_tilted(&self, l: T) -> Result<T> {
        self.value(Rhs::Tilted, l)
    }
}
