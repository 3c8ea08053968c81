//! Error type shared by all modules.

use std::fmt;

/// Errors produced by the library.
///
/// `Domain` means a precondition on the arguments was violated, `Capacity`
/// means the request exceeds a deliberate resource guard, and `Internal`
/// flags a broken invariant that should be unreachable for valid inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition was violated; the message names it.
    Domain(String),
    /// The instance exceeds a size guard (e.g. sampler memory cap).
    Capacity(String),
    /// An internal invariant failed.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Capacity(msg) => write!(f, "capacity error: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn capacity(msg: impl Into<String>) -> Error {
    Error::Capacity(msg.into())
}

pub(crate) fn internal(msg: impl Into<String>) -> Error {
    Error::Internal(msg.into())
}
