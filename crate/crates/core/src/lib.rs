//! Sequential drift detection for one-dimensional diffusions.
//!
//! An observed diffusion carries one of two drift fields, and the tester
//! watches the likelihood ratio between them while paying for observation
//! time. This crate provides:
//!
//! - [`model`]: diffusion models (two drifts, one diffusion coefficient, an
//!   open state domain, a waiting-cost rate), derived quantities such as the
//!   signal-to-noise ratio, and grid certification of the solver regimes;
//! - [`simulate`]: reference/alternative-measure path simulation of the
//!   state and log-likelihood, exit-rule execution, the intrinsic time
//!   change, and running-supremum utilities of the time-changed likelihood;
//! - [`fbp`]: a monotone finite-difference solver for the stationary
//!   obstacle problem satisfied by the value function, a finite-horizon
//!   companion bound, and stopping-boundary extraction/validation;
//! - [`minimax`]: the least favorable prior search via Monte Carlo
//!   estimates of the risk derivative in the prior odds, plus saddle-point
//!   verification;
//! - [`csnr`]: closed-form machinery for the constant signal-to-noise case
//!   (smooth-fit band, least favorable prior, risk curve);
//! - [`risk`]: Monte Carlo risk estimators (change-of-measure and mixture
//!   forms) that cross-check each other.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! the `f64` instantiations below are the working aliases.

pub mod csnr;
pub mod error;
pub mod fbp;
pub mod minimax;
pub mod model;
pub mod numerics;
pub mod risk;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};
pub use scalar::Real;

/// Working scalar type of the CLI and the acceptance suite.
pub type Scalar = f64;

pub type Model = model::DiffusionModel<Scalar>;
pub type Coefficient = model::CoefficientFn<Scalar>;
pub type Assumptions = model::AssumptionReport<Scalar>;
pub type Path = simulate::PathSample<Scalar>;
pub type Outcome = simulate::StoppedOutcome<Scalar>;
pub type Rule = simulate::StoppingRule<Scalar>;
pub type Grid = fbp::Grid2D<Scalar>;
pub type Surface = fbp::ValueSurface<Scalar>;
pub type Boundaries = fbp::BoundaryPair<Scalar>;
pub type SolverParams = fbp::SolveParams<Scalar>;
pub type BandSolution = csnr::CsnrSolution<Scalar>;
pub type RunningCost = csnr::RunningCostFn<Scalar>;
pub type Risk = risk::RiskEstimate<Scalar>;
pub type Derivative = minimax::DerivativeEstimate<Scalar>;
pub type Lfd = minimax::LfdResult<Scalar>;
