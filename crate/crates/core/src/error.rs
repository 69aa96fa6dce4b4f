use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A hypothesis was evaluated (or a class queried) at a point outside its domain.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("empty training sequence")]
    EmptySample,
    /// No hypothesis in the class interpolates the training sequence.
    #[error("training sequence is not realizable: {0}")]
    NotRealizable(String),
    /// A search or enumeration would exceed its work budget. `partial` carries
    /// the best lower bound established before stopping, when there is one.
    #[error("budget exceeded: {what}{}", partial.map(|p| format!(" (lower bound so far: {p})")).unwrap_or_default())]
    Budget { what: String, partial: Option<usize> },
    /// A construction's numeric preconditions do not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>) -> Self {
        Error::Budget { what: what.into(), partial: None }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
