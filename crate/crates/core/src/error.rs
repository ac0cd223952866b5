use thiserror::Error;

/// Errors raised by the simulation and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not unitary (max deviation {deviation:.3e}, tolerance {tolerance:.1e})")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid detection pattern: {0}")]
    InvalidPattern(String),

    #[error("overlap {0} outside [0, 1]")]
    OverlapOutOfRange(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("size {size} exceeds the supported limit {limit} for {what}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("decision rule does not match the interferometer (deviation {0:.3e})")]
    RuleMismatch(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
