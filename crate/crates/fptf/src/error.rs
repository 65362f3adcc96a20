use std::path::PathBuf;

use fptf_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const STALLED: i32 = 4;
    pub const VALIDATION: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(CoreError),

    #[error("design stalled with objective {objective:e}")]
    Stalled { objective: f64 },

    #[error("{failed} of {total} checks failed")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Stalled { .. } => exit::STALLED,
            CliError::Validation { .. } => exit::VALIDATION,
        }
    }
}

impl From<CoreError> for CliError {
    /// Invalid inputs map to configuration errors, everything else is a
    /// numerical failure.
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidRadius(_)
            | CoreError::NonUnivalentMap { .. }
            | CoreError::NonIncreasingRadii { .. }
            | CoreError::InvalidConductivity { .. }
            | CoreError::DegenerateInterface { .. }
            | CoreError::ZeroTruncation
            | CoreError::InvalidContrast(_)
            | CoreError::NoInclusion
            | CoreError::EmptyLoading
            | CoreError::LoadingTooLong { .. }
            | CoreError::OutOfDomain
            | CoreError::NothingToDesign
            | CoreError::InvalidOrder
            | CoreError::ParameterCount { .. }
            | CoreError::InconsistentTruncation { .. }
            | CoreError::InvalidOption(_) => CliError::Config(e.to_string()),
            CoreError::InfeasibleStart(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
