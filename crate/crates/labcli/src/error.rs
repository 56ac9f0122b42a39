use std::fmt;

use stablelab::Error;

/// Failures of a CLI command, each with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration or arguments, or unwritable output.
    Config(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::Parameter(_) | Error::Unsupported(_) => 2,
                Error::Domain(_)
                | Error::Singularity(_)
                | Error::OutsideDomain(_)
                | Error::KernelNegativity(_)
                | Error::Fatness { .. } => 3,
                Error::Degenerate(_)
                | Error::Quadrature { .. }
                | Error::NonTermination { .. }
                | Error::Truncation { .. }
                | Error::TooManyFailures { .. } => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
