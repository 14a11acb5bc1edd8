use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or inconsistent input (bad action index, missing weights, ...).
    #[error("input error: {0}")]
    Input(String),
    /// A game/constraint/strategy file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A construction precondition that can be checked failed.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A strategy was queried beyond the horizon it was built for.
    #[error("query of length {len} exceeds horizon {horizon}")]
    Horizon { len: usize, horizon: usize },
    /// An enumeration or search exceeded its configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// The requested operation does not support this winning condition.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
