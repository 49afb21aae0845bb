//! Terminal decision rule on the weighted likelihood.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Terminal decision: accept the null drift, the alternative drift, or a tie
/// when the statistic sits on the threshold. Ties are resolved toward the
/// alternative downstream; they carry no probability mass under an exit rule
/// whose band excludes 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept0,
    Accept1,
    Tie,
}

impl Decision {
    /// Tie-breaking convention: ties resolve to the alternative.
    pub fn resolve(self) -> u8 {
        match self {
            Decision::Accept0 => 0,
            Decision::Accept1 | Decision::Tie => 1,
        }
    }
}

const TIE_TOL: f64 = 1e-12;

/// Decision from the terminal weighted likelihood psi L_tau: 0 below 1,
/// 1 above 1, tie within 1e-12.
pub fn decision_of<T: Real>(psi_l: T) -> Decision {
    let tol = T::cast(TIE_TOL);
    if psi_l < T::one() - tol {
        Decision::Accept0
    } else if psi_l > T::one() + tol {
        Decision::Accept1
    } else {
        Decision::Tie
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_points() {
        assert_eq!(decision_of(0.5_f64), Decision::Accept0);
        assert_eq!(decision_of(2.0_f64), Decision::Accept1);
        assert_eq!(decision_of(1.0_f64), Decision::Tie);
        assert_eq!(Decision::Tie.resolve(), 1);
    }

    proptest! {
        #[test]
        fn decision_matches_threshold(psi_l in 1e-6_f64..1e6) {
            let d = decision_of(psi_l);
            match d {
                Decision::Accept0 => prop_assert!(psi_l < 1.0),
                Decision::Accept1 => prop_assert!(psi_l > 1.0),
                Decision::Tie => prop_assert!((psi_l - 1.0).abs() <= 1e-12),
            }
        }
    }
}
