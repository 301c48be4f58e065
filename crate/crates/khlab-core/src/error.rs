use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("chain length {0} outside 1..=64")]
    Length(usize),
    #[error("site {site} outside 1..={len}")]
    Site { site: usize, len: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("invalid coupling matrix: {0}")]
    Coupling(String),
    #[error("dimension {dim} exceeds cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("norm drift {drift:.3e} at t = {t} exceeds {limit:.1e}")]
    NormDrift { drift: f64, t: f64, limit: f64 },
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
