use thiserror::Error;

/// Errors shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("width mismatch: expected {expected}, got {got}")]
    Width { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_width(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Width { expected, got })
    }
}
