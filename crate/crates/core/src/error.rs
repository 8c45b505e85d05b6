use thiserror::Error;

/// Errors raised by the discrimination library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension {0} is not a power of two; optical compilation needs N = 2^M")]
    DimensionNotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("angle theta_{index} = {value} lies outside the open interval (0, pi/2)")]
    AngleOutOfDomain { index: usize, value: f64 },

    #[error("coefficient c_{index} = {value} is not strictly positive")]
    NonPositiveCoefficient { index: usize, value: f64 },

    #[error("coefficient c_{index} is zero; the symmetric family is linearly dependent")]
    ZeroCoefficient { index: usize },

    #[error("coefficients are not normalized: sum of squares is {sum_sq}")]
    NotNormalized { sum_sq: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("success probability {p} is outside [0, {bound}]; the failure element would not be positive")]
    ProbabilityOutOfRange { p: f64, bound: f64 },

    #[error("malformed netlist: {0}")]
    MalformedNetlist(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("cannot summarize an empty record set")]
    EmptyRecords,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
