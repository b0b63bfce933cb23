use thiserror::Error;

/// Errors raised by the krein toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KreinError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid involution: {0}")]
    InvalidInvolution(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is singular or numerically singular (condition estimate {0:e})")]
    Singular(f64),

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, KreinError>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(KreinError::DimensionMismatch { expected, found })
    }
}
