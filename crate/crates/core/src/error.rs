use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("id {id} out of range for size {size}")]
    OutOfRange { id: usize, size: usize },

    #[error("invalid matrix file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("stage `{stage}` artifact is missing or stale ({reason}); rerun `{stage}`")]
    StaleArtifact { stage: String, reason: String },

    #[error("word `{0}` is not in the vocabulary")]
    UnknownWord(String),

    #[error("word `{0}` has a zero embedding")]
    ZeroVector(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("workdir is locked by {0}")]
    Locked(PathBuf),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: msg.into(),
        }
    }
}
