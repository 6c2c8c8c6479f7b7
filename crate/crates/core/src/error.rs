use thiserror::Error;

use crate::ncpoly::FactorizationResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("matrix is not Hermitian: asymmetry {residual:.3e} exceeds {allowed:.3e}")]
    NotHermitian { residual: f64, allowed: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("root finder did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no factorization of the derivative found (best residual {:.3e})", .0.residual)]
    NoFactorization(Box<FactorizationResult>),

    #[error("centroid hypothesis violated: |sum a_j| = {norm:.3e} exceeds {allowed:.3e}")]
    CentroidNotZero { norm: f64, allowed: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("checksum mismatch at line {line}")]
    ChecksumMismatch { line: usize },

    #[error("malformed log at line {line}: {reason}")]
    MalformedLog { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
