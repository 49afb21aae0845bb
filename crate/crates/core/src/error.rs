//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("x = {x} is outside the model domain ({lo}, {hi})")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("coefficient evaluated non-finite at x = {x}")]
    StepFailure { x: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("model regime not certified: {0}")]
    Regime(String),

    #[error("boundary extraction failed: {0}")]
    Extraction(String),

    #[error("free-boundary system admits no acceptable solution: {0}")]
    NoSolution(String),

    #[error("sign pattern violated: {0}")]
    SignPattern(String),

    #[error("phi = {phi} lies outside the bracket ({lo}, {hi})")]
    OutsideBracket { phi: f64, lo: f64, hi: f64 },

    #[error("no sign change on the search grid: {0}")]
    NoSignChange(String),

    #[error("Monte Carlo quality: {0}")]
    McQuality(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
