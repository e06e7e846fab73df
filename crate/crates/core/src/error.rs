use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid censoring scheme: {0}")]
    SchemeInvalid(String),
    #[error("failure times must be nondecreasing (violation at index {0})")]
    UnsortedTimes(usize),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("MLE of {0} does not exist (no failures from that cause)")]
    MissingMle(&'static str),
    #[error("degenerate denominator in coefficient at {0}")]
    DegenerateDenominator(String),
    #[error("catastrophic cancellation: positive and negative parts agree to fewer than 3 significant digits ({0})")]
    CancellationOverflow(String),
    #[error("argument outside the finiteness domain: {0}")]
    OutOfDomain(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("posterior mean of {0} is not integrable (shape condition violated)")]
    NonintegrableMean(&'static str),
    #[error("posterior variance of {0} is not integrable (shape condition violated)")]
    NonintegrableVariance(&'static str),
    #[error("improper posterior: {0}")]
    ImproperPosterior(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for validation problems, 1 for
    /// numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SchemeInvalid(_)
            | Error::UnsortedTimes(_)
            | Error::LengthMismatch(_)
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::InvalidArgument(_) => 2,
            _ => 1,
        }
    }
}
