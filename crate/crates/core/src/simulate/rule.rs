//! Stopping rules driven by the weighted likelihood.

use crate::fbp::BoundaryPair;
use crate::numerics::interp;
use crate::scalar::Real;

/// Continuation band in the weighted likelihood, possibly state-dependent.
///
/// The rule fires when log(psi L) leaves the open band
/// (log l0(x) + shift, log l1(x) + shift). The `shift` implements rules tuned
/// at a different prior: the exit rule of phi0 L from (l0, l1), evaluated on
/// a run whose payoff uses psi, is the same band shifted by log(psi/phi0).
#[derive(Debug, Clone)]
pub struct StoppingRule<T: Real> {
    kind: Kind<T>,
    log_shift: T,
}

#[derive(Debug, Clone)]
enum Kind<T: Real> {
    Immediate,
    Bands { log_l0: T, log_l1: T },
    Curves { x: Vec<T>, log_l0: Vec<T>, log_l1: Vec<T> },
}

impl<T: Real> StoppingRule<T> {
    /// Stop at time zero, whatever the state.
    pub fn immediate() -> Self {
        Self {
            kind: Kind::Immediate,
            log_shift: T::zero(),
        }
    }

    /// Constant band 0 < l0 < l1.
    pub fn bands(l0: T, l1: T) -> Self {
        assert!(l0 > T::zero() && l1 > l0, "need 0 < l0 < l1");
        Self {
            kind: Kind::Bands {
                log_l0: l0.ln(),
                log_l1: l1.ln(),
            },
            log_shift: T::zero(),
        }
    }

    /// State-dependent band sampled on a grid; interpolated linearly in
    /// (x, log l) and constant-extrapolated beyond the table.
    pub fn from_pair(pair: &BoundaryPair<T>) -> Self {
        let log_l0 = pair.l0.iter().map(|&v| v.ln()).collect();
        let log_l1 = pair.l1.iter().map(|&v| v.ln()).collect();
        Self {
            kind: Kind::Curves {
                x: pair.x_nodes.clone(),
                log_l0,
                log_l1,
            },
            log_shift: T::zero(),
        }
    }

    /// The same band scaled multiplicatively by `factor` (both edges).
    pub fn scaled(mut self, factor: T) -> Self {
        assert!(factor > T::zero());
        self.log_shift = self.log_shift + factor.ln();
        self
    }

    /// Rule tuned at prior `phi0` but executed on a run with payoff prior
    /// `psi`: shifts the band by log(psi / phi0).
    pub fn tuned_at(self, phi0: T, psi: T) -> Self {
        self.scaled(psi / phi0)
    }

    /// Signed distances of log_phi past the band edges at state x:
    /// (below-lower, above-upper); positive means outside on that side.
    /// `None` means the rule stops unconditionally.
    pub fn overshoots(&self, x: T, log_phi: T) -> Option<(T, T)> {
        let (lo, hi) = match &self.kind {
            Kind::Immediate => return None,
            Kind::Bands { log_l0, log_l1 } => (*log_l0, *log_l1),
            Kind::Curves { x: xs, log_l0, log_l1 } => (
                interp::linear(xs, log_l0, x),
                interp::linear(xs, log_l1, x),
            ),
        };
        Some((
            lo + self.log_shift - log_phi,
            log_phi - (hi + self.log_shift),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_report_overshoot_signs() {
        let rule = StoppingRule::bands(0.5_f64, 2.0);
        // inside
        let (lo, hi) = rule.overshoots(0.0, 0.0).unwrap();
        assert!(lo < 0.0 && hi < 0.0);
        // below
        let (lo, _) = rule.overshoots(0.0, (0.4_f64).ln()).unwrap();
        assert!(lo > 0.0);
        // above
        let (_, hi) = rule.overshoots(0.0, (2.5_f64).ln()).unwrap();
        assert!(hi > 0.0);
    }

    #[test]
    fn scaling_shifts_the_band() {
        let rule = StoppingRule::bands(0.5_f64, 2.0).scaled(2.0);
        // phi = 0.9 is inside (0.5, 2.0) but below the scaled lower edge 1.0.
        let (lo, _) = rule.overshoots(0.0, (0.9_f64).ln()).unwrap();
        assert!(lo > 0.0);
    }

    #[test]
    fn immediate_rule_always_fires() {
        assert!(StoppingRule::<f64>::immediate().overshoots(1.0, 0.0).is_none());
    }
}
