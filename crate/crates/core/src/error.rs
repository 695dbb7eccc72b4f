use crate::prelude::*;

/// Errors raised by the calculus.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index {index} out of range 1..={n}")]
    Index { index: usize, n: usize },
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("backend mismatch: {0}")]
    Backend(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
