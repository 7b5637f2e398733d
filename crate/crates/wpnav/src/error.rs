//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pose: ({x:.3}, {y:.3}) is not in free space")]
    InvalidPose { x: f64, y: f64 },

    #[error("point ({x:.3}, {y:.3}) lies in a blocked cell")]
    BlockedPoint { x: f64, y: f64 },

    #[error("world generation failed: {0}")]
    Generation(String),

    #[error("episode sampling failed: {0}")]
    Sampling(String),

    #[error("token id {0} is outside the vocabulary")]
    UnknownToken(u16),

    #[error("STOP action carries no motion")]
    NotAMotion,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{op}: shape mismatch ({detail})")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("attention requires a non-empty key set")]
    EmptyKeys,

    #[error("sequence length mismatch: {0}")]
    LengthMismatch(String),

    #[error("planner incomplete: no goal connection within budget (best partial cost {best_partial:.3} s)")]
    PlannerIncomplete { best_partial: f64 },

    #[error("numeric abort: {0}")]
    NumericAbort(String),

    #[error("config digest mismatch: artifact has {found}, expected {expected} (pass --allow-digest-mismatch to override)")]
    DigestMismatch { expected: String, found: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("refusing to overwrite {0} (pass --force)")]
    WouldOverwrite(String),

    #[error("environment worker {env}: {source}")]
    Worker {
        env: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code for the CLI: 1 usage, 2 data/digest, 3 numeric abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 1,
            Error::NumericAbort(_) | Error::NonFinite(_) => 3,
            _ => 2,
        }
    }
}
