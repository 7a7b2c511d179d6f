use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("determinant is {det}, expected 1")]
    Determinant { det: BigInt },
    #[error("monodromy with trace {trace} is not hyperbolic (|trace| must exceed 2)")]
    NonHyperbolic { trace: BigInt },
    #[error("invalid slope {p}/{q}")]
    InvalidSlope { p: BigInt, q: BigInt },
    #[error("invalid quadratic surd: {0}")]
    InvalidSurd(String),
    #[error("invalid twist word: {0}")]
    InvalidWord(String),
    #[error("invalid edge path: {0}")]
    InvalidPath(String),
    #[error("path enumeration produced more than {cap} paths")]
    TooManyPaths { cap: usize },
    #[error("angle polytope has empty interior")]
    NoInteriorPoint,
    #[error("solver did not converge after {iterations} iterations (projected gradient {gradient:e})")]
    NonConvergence { iterations: usize, gradient: f64 },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable name, used in error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Determinant { .. } => "DeterminantError",
            Error::NonHyperbolic { .. } => "NonHyperbolic",
            Error::InvalidSlope { .. } => "InvalidSlope",
            Error::InvalidSurd(_) => "InvalidSurd",
            Error::InvalidWord(_) => "NonPositiveSyllable",
            Error::InvalidPath(_) => "InvalidPath",
            Error::TooManyPaths { .. } => "TooManyPaths",
            Error::NoInteriorPoint => "NoInteriorPoint",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::Internal(_) => "Internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
