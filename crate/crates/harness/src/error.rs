use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] copgauss::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Csv { path: String, message: String },

    #[error("{path}: byte {offset}: {message}")]
    Pgm {
        path: String,
        offset: usize,
        message: String,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code: 2 usage, 3 data, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        use copgauss::Error as E;
        match self {
            Self::Usage(_) | Self::Core(E::Plan(_)) => 2,
            Self::Core(E::Decomposition { .. } | E::Fit(_) | E::Test(_) | E::Selection(_)) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
