use thiserror::Error;

/// Errors raised by constructions, functional calculus and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("surgery failure: {0}")]
    SurgeryFailure(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
