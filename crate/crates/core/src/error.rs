use thiserror::Error;

/// Error type shared by every operation in this crate.
///
/// The three non-IO variants map onto the CLI's exit-code contract:
/// validation and ingestion problems are caller errors (exit 1), while a
/// refusal means the inputs were well-formed but a documented precondition
/// of the requested computation does not hold (exit 2 in experiment runs).
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: dimension mismatches, out-of-range parameters,
    /// inconsistent partitions, and similar caller mistakes.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input data could not be parsed into a usable dataset.
    #[error("ingestion error: {0}")]
    Ingestion(String),

    /// The operation's mathematical precondition is not satisfied
    /// (e.g. an enumeration cap exceeded, coincident centroids, a cluster
    /// that is not link-ball-separated).
    #[error("precondition not satisfied: {0}")]
    Refusal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn ingestion(msg: impl Into<String>) -> Self {
        Error::Ingestion(msg.into())
    }

    pub fn refusal(msg: impl Into<String>) -> Self {
        Error::Refusal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
