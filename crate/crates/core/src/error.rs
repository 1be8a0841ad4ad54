use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        /// 1-based line in the input.
        row: usize,
        /// 1-based column, 0 when the whole line is at fault.
        column: usize,
        message: String,
    },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("MDL penalty is undefined on an empty dataset (ln 0)")]
    EmptyDataset,

    #[error("{what} refused: {n} variables exceeds the limit of {limit}")]
    LimitExceeded {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("instance too small: {0}")]
    InstanceTooSmall(String),

    #[error("threshold cross-check failed: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(row: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            column,
            message: message.into(),
        }
    }

    /// True for malformed input and I/O failures, false for domain refusals.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
