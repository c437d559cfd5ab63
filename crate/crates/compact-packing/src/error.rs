use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants mirror the failure classes callers need to tell apart: bad
/// numeric input, malformed text, structurally invalid objects, violated
/// preconditions and numerical failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at line {line}, character {character}: {message}")]
    Parse {
        line: usize,
        character: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid packing: {0}")]
    InvalidPacking(String),
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            character: e.column(),
            message: e.to_string(),
        }
    }
}
