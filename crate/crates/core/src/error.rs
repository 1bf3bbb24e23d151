use crate::schedule::Schedule;

/// Errors raised by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The instance is larger than the operation is willing to enumerate.
    #[error("size guard: {0}")]
    TooLarge(String),

    /// The LP solver hit a pivot below threshold or failed its residual check.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// No simple schedule could be recovered from a cutting-plane run.
    /// Carries the (feasible, possibly non-simple) schedule that was found.
    #[error("extraction failed at value {value}: {reason}")]
    ExtractionFailed {
        value: f64,
        schedule: Schedule,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
