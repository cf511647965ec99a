use std::path::PathBuf;

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A CSV row could not be interpreted as a record.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    /// The CSV header does not match the expected schema.
    #[error("unexpected header {found:?}, expected `timestamp,irradiance_wm2,temperature_k`")]
    Header { found: String },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A column has zero variance so its correlation is undefined.
    #[error("column `{0}` has zero variance")]
    ConstantColumn(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    /// The expanded design matrix is rank deficient.
    #[error("design matrix is rank deficient; dependent columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("not enough samples: need at least {needed}, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },
    #[error("model file format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: String, expected: u32 },
    #[error("model file is truncated")]
    Truncated,
    #[error("model file is corrupted: {0}")]
    Corrupted(String),
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),
    #[error("no records on {0}")]
    NoRecordsOnDay(chrono::NaiveDate),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
