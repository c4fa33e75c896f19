use contactrom_core::Error;

/// Failure of a CLI command; [`CliError::exit_code`] maps it to the process
/// status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, bad configuration, missing or unreadable inputs.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    /// A comparison exceeded one of its tolerances.
    #[error("acceptance check failed:\n  {}", .0.join("\n  "))]
    Acceptance(Vec<String>),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_ACCEPTANCE: u8 = 3;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_)
                | Error::ParameterOutOfBox { .. }
                | Error::ProblemMismatch { .. }
                | Error::VersionMismatch { .. }
                | Error::Checksum(_)
                | Error::Format { .. }
                | Error::InvalidMesh(_)
                | Error::EmptyMasterSurface(_)
                | Error::Io(_)
                | Error::Json(_) => EXIT_USAGE,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
