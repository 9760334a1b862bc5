use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("modulus mismatch or overflow: {0}")]
    Modulus(String),
    #[error("degenerate ensemble: Pr(corank = 0) = 1")]
    DegenerateEnsemble,
    #[error("untruncatable state: {0}")]
    Untruncatable(String),
    #[error("event budget exceeded after {events} events at time {time}")]
    EventBudget { events: u64, time: f64 },
    #[error("not representable: {0}")]
    NotRepresentable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
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
        Error::Parse(e.to_string())
    }
}
