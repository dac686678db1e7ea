use std::path::PathBuf;

use oscnet_core::Error as CoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad IDX magic {found:#010x} (expected 2049 or 2051)")]
    BadMagic { found: u32 },
    #[error("payload length mismatch: header implies {expected} bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("malformed {format}: {message}")]
    Format { format: &'static str, message: String },
    #[error("unsupported {kind} version {found} (this build reads {supported})")]
    UnsupportedVersion { kind: &'static str, found: u32, supported: u32 },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("ODE and analytic outputs disagree: {0}")]
    Disagreement(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn format(format: &'static str, message: impl Into<String>) -> Self {
        Error::Format { format, message: message.into() }
    }

    /// Process exit status: 2 for numeric degeneracy, 3 for runs that did
    /// not settle or converge, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) => match e.root() {
                CoreError::NearSingularPhase { .. }
                | CoreError::DegenerateNormalization { .. }
                | CoreError::DegenerateFeature { .. }
                | CoreError::NumericOverflow { .. }
                | CoreError::ZeroVector { .. } => 2,
                CoreError::NotSettled { .. } | CoreError::NotConverged { .. } => 3,
                _ => 1,
            },
            Error::Disagreement(_) => 3,
            _ => 1,
        }
    }
}
