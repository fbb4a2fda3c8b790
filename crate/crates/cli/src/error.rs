use std::fmt;

/// Exit status for input or configuration problems.
pub const EXIT_INPUT: u8 = 2;
/// Exit status for everything else.
pub const EXIT_INTERNAL: u8 = 1;

/// An error tagged with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

pub fn input(error: impl Into<anyhow::Error>) -> CliError {
    CliError {
        code: EXIT_INPUT,
        error: error.into(),
    }
}

pub fn internal(error: impl Into<anyhow::Error>) -> CliError {
    CliError {
        code: EXIT_INTERNAL,
        error: error.into(),
    }
}
