use thiserror::Error;

/// Errors raised by the enclosure pipeline.
///
/// Display strings are stable: the CLI and the C API surface them verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("interval overflow")]
    IntervalOverflow,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("eigendecomposition failed")]
    EigenFailed,
    #[error("singular preconditioner entry")]
    SingularPreconditioner,
    #[error("singular preconditioner block")]
    SingularPreconditionerBlock,
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("inconsistent enclosure")]
    InconsistentEnclosure,
    #[error("baseline size cap: m*n = {size} exceeds {cap}")]
    BaselineSizeCap { size: usize, cap: usize },
    #[error("no initial enclosure available")]
    NoInitialEnclosure,
    #[error("kronecker product too large")]
    KronOverflow,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
