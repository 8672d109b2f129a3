use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has zero power and cannot be normalized")]
    ZeroPower,

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error(
        "mode {mode} (second-moment diameter {diameter:.4e} m) does not fit the grid; \
         extent must be at least {required_extent:.4e} m"
    )]
    ModeTooLarge {
        mode: String,
        diameter: f64,
        required_extent: f64,
    },

    #[error("index {k} out of range 0..={order}")]
    IndexOutOfRange { k: u32, order: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("separation {separation:.4e} m is not representable on a grid of pitch {pitch:.4e} m: {reason}")]
    Separation {
        separation: f64,
        pitch: f64,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("probability {0} outside [0, 1]")]
    Probability(f64),

    #[error("plan validation failed: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown plan `{0}` (built-in plans: paper-n4, paper-n8)")]
    UnknownPlan(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
