use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    /// A segmentation label violates the ordering chain. `rep` is 1-based.
    #[error("repetition {rep}: {message}")]
    Labels { rep: usize, message: String },

    #[error("UPDRS score {0} is not on the half-step grid 0..4")]
    UpdrsGrid(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value at t = {t} s lies outside the series support [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("segmentation failed: {0}")]
    Segmentation(String),

    #[error("feature `{0}` has zero variance")]
    ConstantFeature(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("point set is degenerate (rank {rank} < 2)")]
    Degenerate { rank: usize },

    #[error("row {row}: {source}")]
    Fold {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
