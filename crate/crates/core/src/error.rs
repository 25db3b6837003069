use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("not Hermitian: {0}")]
    NotHermitian(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error (line {line}): {msg}")]
    Parse { line: usize, msg: String },

    #[error("ball size limit exceeded: projected {projected} elements, cap {cap}")]
    BallCap { projected: u128, cap: usize },

    #[error("inconsistent affine constraints (residual {residual:.3e})")]
    IllPosedAffine { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
