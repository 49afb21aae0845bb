//! JSON descriptors that build models and running costs.
//!
//! A model document is one of
//!
//! ```json
//! {"type": "bessel", "delta0": 3.0, "delta1": 4.0, "cost_rate": 1.0}
//! {"type": "power", "eta0": 0.0, "eta1": 0.5, "sigma": "x^1.25", "cost_rate": 1.0}
//! {"type": "constant", "mu0": 0.0, "mu1": 1.0, "sigma": 1.0, "cost_rate": 1.0}
//! {"type": "custom", "mu0": "0", "mu1": "1/x", "sigma": "sqrt(x)",
//!  "domain": [0.0, null], "cost_rate": 1.0}
//! ```
//!
//! Coefficient strings use the expression grammar of [`super::expr`]; a
//! `null` domain endpoint means infinite.

use serde::{Deserialize, Serialize};

use super::{builtin_bessel, builtin_constant, builtin_power, CoefficientFn, DiffusionModel};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Bessel {
        delta0: f64,
        delta1: f64,
        #[serde(default = "default_cost")]
        cost_rate: f64,
    },
    Power {
        eta0: f64,
        eta1: f64,
        sigma: String,
        #[serde(default = "default_cost")]
        cost_rate: f64,
    },
    Constant {
        mu0: f64,
        mu1: f64,
        sigma: f64,
        #[serde(default = "default_cost")]
        cost_rate: f64,
    },
    Custom {
        mu0: String,
        mu1: String,
        sigma: String,
        /// Open interval; `null` endpoints are infinite.
        domain: (Option<f64>, Option<f64>),
        #[serde(default = "default_cost")]
        cost_rate: f64,
    },
}

fn default_cost() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn build<T: Real>(&self) -> Result<DiffusionModel<T>> {
        match self {
            ModelSpec::Bessel {
                delta0,
                delta1,
                cost_rate,
            } => builtin_bessel(T::cast(*delta0), T::cast(*delta1))?
                .with_cost_rate(T::cast(*cost_rate)),
            ModelSpec::Power {
                eta0,
                eta1,
                sigma,
                cost_rate,
            } => builtin_power(
                T::cast(*eta0),
                T::cast(*eta1),
                CoefficientFn::from_expr(sigma)?,
            )?
            .with_cost_rate(T::cast(*cost_rate)),
            ModelSpec::Constant {
                mu0,
                mu1,
                sigma,
                cost_rate,
            } => builtin_constant(T::cast(*mu0), T::cast(*mu1), T::cast(*sigma))?
                .with_cost_rate(T::cast(*cost_rate)),
            ModelSpec::Custom {
                mu0,
                mu1,
                sigma,
                domain,
                cost_rate,
            } => {
                let lo = domain.0.map(T::cast).unwrap_or_else(T::neg_infinity);
                let hi = domain.1.map(T::cast).unwrap_or_else(T::infinity);
                DiffusionModel::new(
                    (lo, hi),
                    CoefficientFn::from_expr(mu0)?,
                    CoefficientFn::from_expr(mu1)?,
                    CoefficientFn::from_expr(sigma)?,
                    T::cast(*cost_rate),
                )
            }
        }
    }

    pub fn cost_rate(&self) -> f64 {
        match self {
            ModelSpec::Bessel { cost_rate, .. }
            | ModelSpec::Power { cost_rate, .. }
            | ModelSpec::Constant { cost_rate, .. }
            | ModelSpec::Custom { cost_rate, .. } => *cost_rate,
        }
    }

    pub fn from_json(doc: &str) -> Result<Self> {
        serde_json::from_str(doc).map_err(|e| Error::Config(format!("model document: {e}")))
    }
}

/// Descriptor for the running cost of the constant-SNR solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RunningCostSpec {
    Constant {
        c: f64,
    },
    Expr {
        expr: String,
        #[serde(default)]
        symmetric: bool,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builds_bessel_from_json() {
        let spec =
            ModelSpec::from_json(r#"{"type":"bessel","delta0":3,"delta1":4,"cost_rate":2.0}"#)
                .unwrap();
        let m: DiffusionModel<f64> = spec.build().unwrap();
        assert_relative_eq!(m.snr(1.0).unwrap(), 0.5);
        assert_relative_eq!(m.cost_rate(), 2.0);
    }

    #[test]
    fn builds_custom_with_infinite_domain() {
        let spec = ModelSpec::from_json(
            r#"{"type":"custom","mu0":"0","mu1":"1","sigma":"1","domain":[null,null],"cost_rate":1.0}"#,
        )
        .unwrap();
        let m: DiffusionModel<f64> = spec.build().unwrap();
        assert!(m.contains(-1e12));
        assert_relative_eq!(m.snr(0.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_malformed_document() {
        assert!(ModelSpec::from_json(r#"{"type":"bessel","delta0":3}"#).is_err());
        assert!(ModelSpec::from_json("not json").is_err());
    }
}
