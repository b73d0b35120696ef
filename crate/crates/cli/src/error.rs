use std::path::Path;

use selector_core::Error;

pub const EXIT_CONSTRAINT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_SOLVER: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(e) => match e {
                Error::InvalidParameter(_) => EXIT_USAGE,
                Error::Io(_) => EXIT_IO,
                Error::TooManyVariables { .. } | Error::EnumerationTooLarge { .. } => EXIT_SOLVER,
                _ => EXIT_DATA,
            },
        }
    }
}
