//! Crate-wide error type and exit-code mapping.

use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("degenerate power-law tail: {0}")]
    DegenerateTail(String),

    #[error("graph is disconnected: {0}")]
    Disconnected(String),

    /// A count matrix update that can only happen through a bug (e.g. a
    /// decrement of a zero cell). Callers should treat this as fatal.
    #[error("internal consistency fault: {0}")]
    Consistency(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code contract: 0 success, 1 validation, 2 i/o,
    /// 3 internal-consistency fault.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::Consistency(_) => 3,
            _ => 1,
        }
    }
}
