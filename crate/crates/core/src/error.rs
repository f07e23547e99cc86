//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by grid construction, operators, estimators and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("expected a field in the {expected} domain, found {found}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("under-resolved time grid: {0}")]
    UnderResolved(String),
    #[error("support violation: {0}")]
    Support(String),
    #[error("periodization: {0}")]
    Periodization(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
