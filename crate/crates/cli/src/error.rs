use std::path::PathBuf;

use symdisc::Error as DomainError;
use thiserror::Error;

/// Process exit codes. Clap's own argument errors also exit with [`USAGE`].
pub mod code {
    pub const USAGE: u8 = 2;
    pub const ANGLE: u8 = 3;
    pub const COEFFICIENT: u8 = 4;
    pub const NOT_POWER_OF_TWO: u8 = 5;
    pub const DIMENSION: u8 = 6;
    pub const PROBABILITY: u8 = 7;
    pub const NETLIST: u8 = 8;
    pub const CONFIG: u8 = 9;
    pub const IO: u8 = 10;
    pub const VERIFICATION: u8 = 11;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => code::USAGE,
            CliError::Io { .. } => code::IO,
            CliError::Verification(_) => code::VERIFICATION,
            CliError::Domain(e) => match e {
                DomainError::AngleOutOfDomain { .. } => code::ANGLE,
                DomainError::NonPositiveCoefficient { .. }
                | DomainError::ZeroCoefficient { .. }
                | DomainError::NotNormalized { .. } => code::COEFFICIENT,
                DomainError::DimensionNotPowerOfTwo(_) => code::NOT_POWER_OF_TWO,
                DomainError::DimensionTooSmall(_)
                | DomainError::DimensionMismatch { .. }
                | DomainError::IndexOutOfRange { .. } => code::DIMENSION,
                DomainError::ProbabilityOutOfRange { .. } => code::PROBABILITY,
                DomainError::MalformedNetlist(_) => code::NETLIST,
                DomainError::InvalidConfig(_) | DomainError::EmptyRecords => code::CONFIG,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
