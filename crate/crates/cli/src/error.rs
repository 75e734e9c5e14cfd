use std::fmt;

use expfact_core::Error;

/// Process exit status per failure class; usage errors exit with 2 from the
/// argument parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Config = 3,
    Cap = 4,
    Precondition = 5,
    Io = 6,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: ExitCode::Config, message: message.into() }
    }

    pub fn cap(message: impl Into<String>) -> Self {
        Self { code: ExitCode::Cap, message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Self { code: ExitCode::Precondition, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: ExitCode::Io, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OrderOutOfRange { .. } => Self::cap(e.to_string()),
            _ => Self::precondition(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Rejects `value > max` with the cap-exceeded status.
pub fn check_cap(name: &str, value: usize, max: usize) -> CliResult<()> {
    if value > max {
        return Err(CliError::cap(format!("{name} = {value} exceeds the cap {max}")));
    }
    Ok(())
}
