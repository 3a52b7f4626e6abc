//! Error type shared by every module in this crate.

use thiserror::Error;

/// Errors produced by cube handling, numerical kernels and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented constraint.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two operands (or an operand and a target shape) do not fit together.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A NaN or infinity showed up inside an iterative computation.
    #[error("non-finite value in {context} at iteration {iteration}")]
    NonFinite { context: String, iteration: usize },

    /// A cube file failed to parse.
    #[error("bad cube file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
