//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by the spectral solver and its oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid does not resolve the field: {0}")]
    Resolution(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("vanishing denominator at mode (l={l}, j={j})")]
    Resonance { l: usize, j: usize },
    #[error("fixed point did not converge after {iterations} iterations (ratio {ratio:.3e})")]
    NonConvergence { iterations: usize, ratio: f64 },
    #[error("operation undefined for the zero vector")]
    ZeroVector,
    #[error("truncation overflow: need {needed} modes, have {available}")]
    Truncation { needed: usize, available: usize },
    #[error("nonlinearity has no nonzero Taylor coefficient of order >= 2")]
    Unclassifiable,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("Newton refinement failed: {0}")]
    Divergence(String),
    #[error("function is not of the form m(t+x, t-x): reconstruction residual {0:.3e}")]
    NotDecomposable(f64),
    #[error("time integration became unstable at t = {0}")]
    Instability(f64),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
