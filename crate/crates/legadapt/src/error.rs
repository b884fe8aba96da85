use std::path::PathBuf;

use legadapt_core::Error as CoreError;

/// Failures surfaced by the CLI, file formats and campaigns.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{0}")]
    Data(String),
    #[error("rejection envelope acceptance {acceptance:.4} is below 1%")]
    Envelope { acceptance: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("acceptance check failed: {0}")]
    CheckFailed(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 0 success, 1 usage or config, 2 data, 3 failed acceptance check.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::Config(_) => 1,
            Error::Core(CoreError::SampleTooSmall { .. }) => 1,
            Error::Core(CoreError::InvalidParameter(_)) => 1,
            Error::Core(CoreError::RoughRegressionTruth { .. }) => 1,
            Error::CheckFailed(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
