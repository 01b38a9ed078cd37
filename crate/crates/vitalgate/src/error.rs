use std::path::PathBuf;

/// Crate-wide error type. Variants group into the three CLI failure
/// classes: usage (handled by clap), data, and numeric.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{file}:{line}: {msg}")]
    Parse { file: PathBuf, line: usize, msg: String },

    #[error("{0}")]
    Data(String),

    #[error("config {file}: {msg}")]
    Config { file: PathBuf, msg: String },

    #[error("{0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code for the CLI: 2 for data problems, 3 for numeric ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Data(_) | Error::Config { .. } | Error::Io(_) => 2,
            Error::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
