use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] tnt_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported model format {0:?}")]
    UnsupportedVersion(String),
    #[error("model file is truncated or corrupt: {0}")]
    Corrupt(String),
    #[error("sentence {sentence}: {message}")]
    Alignment { sentence: usize, message: String },
    #[error("{0}")]
    Evaluation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
