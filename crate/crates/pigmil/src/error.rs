//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A dataset, CSV file, or model file could not be read or parsed.
    #[error("data error: {0}")]
    Data(String),

    /// The linear solver hit its iteration cap before reaching tolerance.
    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    Solver { residual: f64, iterations: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
