use thiserror::Error;

/// Errors for model, information and evaluation operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state for {model}: {reason}")]
    InvalidState { model: &'static str, reason: String },

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),

    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),

    #[error("input out of range: {0}")]
    OutOfRange(String),

    #[error("infeasible measurement parameters: {0}")]
    InfeasibleParam(String),

    #[error("functional {functional} is not evaluatable on the {model} model")]
    Unresolvable { functional: String, model: &'static str },

    #[error("empty search box")]
    EmptyBox,

    #[error("bad argument: {0}")]
    BadArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI contract: 2 usage/input, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}
