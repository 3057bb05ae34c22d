use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("dense operator of size {size} exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("index {index} out of range for {len} arms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("no good states: the oracle marks nothing reachable from the prepared state (p = 0)")]
    NoGoodStates,

    #[error("insufficient budget: T = {rounds} is smaller than the number of arms {arms}")]
    InsufficientBudget { rounds: usize, arms: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateInstance(_) | Error::NoGoodStates => 2,
            Error::Invariant(_) => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
