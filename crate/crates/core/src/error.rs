use thiserror::Error;

/// Errors surfaced by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A strategy or set does not reach the target level.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("enumeration too large: {states} states exceeds bound {bound}")]
    EnumerationTooLarge { states: f64, bound: f64 },

    #[error("population cap exceeded: {total} particles > cap {cap}")]
    CapExceeded { total: u64, cap: u64 },

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
