use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite integrand value at {location}")]
    NonFinite { location: String },

    /// A result that should be real (or positive) came out otherwise.
    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    /// A discretisation that did not settle when refined.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("failed to converge: {0}")]
    Convergence(String),

    #[error("empty report: no estimates to emit")]
    EmptyReport,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
