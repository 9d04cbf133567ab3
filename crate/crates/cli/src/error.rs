use thiserror::Error;

/// Command failure, mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A check or the oracle did not meet its target.
    #[error("{0}")]
    Failure(String),
    #[error("parameter error: {0}")]
    Param(String),
    #[error("input error: {0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Param(_) => 2,
            CliError::Input(_) => 3,
        }
    }
}

impl From<infocap::Error> for CliError {
    fn from(e: infocap::Error) -> Self {
        CliError::Param(e.to_string())
    }
}

pub fn input_error(e: infocap::Error) -> CliError {
    CliError::Input(e.to_string())
}

pub type CliResult<T> = std::result::Result<T, CliError>;
