use thiserror::Error;

/// Errors produced by the analysis chain.
///
/// Variants fall into three families that the CLI maps onto exit codes:
/// argument problems, data problems and numeric failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "fluctuation function undefined at scale s = {scale}: every segment has zero variance"
    )]
    UndefinedFluctuation { scale: usize },

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes and C error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Argument(_) => ErrorKind::Usage,
            Error::EmptyInput(_)
            | Error::Parse { .. }
            | Error::InsufficientData(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::Data,
            Error::Domain(_)
            | Error::UndefinedFluctuation { .. }
            | Error::FitFailure(_)
            | Error::Numeric(_) => ErrorKind::Numeric,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
