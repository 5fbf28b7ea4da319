use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum SpabmError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),

    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),

    #[error("solver did not converge after {iterations} iterations (worst residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("empty community: {0}")]
    EmptyCommunity(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, SpabmError>;
