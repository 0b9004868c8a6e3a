//! Error type shared across the library.

use std::fmt;

/// Errors produced by instance loading, solver configuration, and model
/// construction.
#[derive(Debug)]
pub enum Error {
    /// A function argument violates its documented precondition.
    InvalidArgument(String),
    /// An instance fails structural validation (ids, references, limits).
    InvalidInstance(String),
    /// An instance is structurally sound but cannot be covered within its
    /// travel budget.
    InfeasibleInstance(String),
    /// An assignment or solution does not match the model dimensions.
    DimensionMismatch(String),
    /// A solver refused to run because a configured limit would be exceeded.
    LimitExceeded(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn invalid_instance(msg: impl Into<String>) -> Self {
        Error::InvalidInstance(msg.into())
    }

    pub fn infeasible_instance(msg: impl Into<String>) -> Self {
        Error::InfeasibleInstance(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidInstance(msg) => write!(f, "invalid instance: {msg}"),
            Error::InfeasibleInstance(msg) => write!(f, "infeasible instance: {msg}"),
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::LimitExceeded(msg) => write!(f, "limit exceeded: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
            Error::Json(err) => write!(f, "json error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            Error::Json(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
