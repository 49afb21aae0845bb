//! Closed form of the risk at prior odds psi under the exit rule tuned at
//! phi0, for the constant-SNR band solution.
//!
//! With a = l0/phi0 and b = l1/phi0 the likelihood ratio exits (a, b) from 1;
//! under the reference law it is a martingale, so the upper-exit probability
//! is p = (1 - a)/(b - a). The waiting costs follow from the potential
//! functions: Y_g(L_t) + int g(L_s) ds is a martingale when
//! (rho0^2/2) l^2 Y_g'' + g = 0, so E int_0^tau g(L_t) dt = -E[Y_g(L_tau)]
//! with g = f and g = l f for the two mixture components. The terminal
//! error term is p min(1, psi b) + (1 - p) min(1, psi a), whose kinks at
//! psi = phi0/l1 and psi = phi0/l0 are the branch seams of the piecewise
//! formula.

use super::CsnrSolution;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Risk at prior odds `psi` when observation is stopped by the rule tuned at
/// `phi0` (exit of phi0 L from the solution band).
pub fn eval_ubar<T: Real>(sol: &CsnrSolution<T>, psi: T, phi0: T) -> Result<T> {
    if !(psi > T::zero() && phi0 > T::zero()) {
        return Err(Error::InvalidArgument(
            "psi and phi0 must be positive".into(),
        ));
    }
    if !(phi0 > sol.l0 && phi0 < sol.l1) {
        return Err(Error::OutsideBracket {
            phi: phi0.as_f64(),
            lo: sol.l0.as_f64(),
            hi: sol.l1.as_f64(),
        });
    }
    let ev = sol.evaluator();
    let one = T::one();
    let a = sol.l0 / phi0;
    let b = sol.l1 / phi0;
    let p = (one - a) / (b - a);

    let terminal = p * (psi * b).min(one) + (one - p) * (psi * a).min(one);
    let cost_null = -(p * ev.m_plain(b)? + (one - p) * ev.m_plain(a)?);
    let cost_alt = -(p * ev.m_tilted(b)? + (one - p) * ev.m_tilted(a)?);
    Ok((terminal + cost_null + psi * cost_alt) / (one + psi))
}
