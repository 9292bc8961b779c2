//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (dimension mismatch, NaN input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A model or config file failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A loss or parameter became non-finite during training.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Error {
        Error::Contract(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Error {
        Error::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Error {
        Error::Numerical(msg.into())
    }
}
