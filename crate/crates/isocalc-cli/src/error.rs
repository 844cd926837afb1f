//! CLI error type and the exit-code contract: 0 success, 1 identity or
//! computation failure, 2 usage, 3 consistency rejection.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config, bad argument values.
    Usage(String),
    /// The library refused or failed the computation.
    Compute(isocalc::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(isocalc::Error::Consistency { .. }) => 3,
            CliError::Compute(isocalc::Error::InvalidParameter(_) | isocalc::Error::Domain(_)) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<isocalc::Error> for CliError {
    fn from(e: isocalc::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
