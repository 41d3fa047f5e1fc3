//! Error type shared across the toolkit.

use thiserror::Error;

/// Errors produced by game construction, strategy building, simulation and
/// analysis. The categories map onto the CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input value or malformed domain object.
    #[error("domain error: {0}")]
    Domain(String),

    /// Instance too large for exhaustive enumeration without an override.
    #[error("size guard: {0}")]
    Size(String),

    /// Missing, inconsistent or unparseable data.
    #[error("data error: {0}")]
    Data(String),

    /// A numeric procedure failed to converge or produced an invalid result.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
