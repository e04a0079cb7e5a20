//! Error type carrying the process exit code.
//!
//! Exit codes: 0 success, 1 usage or configuration problems, 2 numerical
//! failures inside the simulation, 3 statistical acceptance failures in
//! scenario runs.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid config, malformed input files.
    Usage(String),
    /// The simulation itself failed: instability or a domain violation.
    Numerical(String),
    /// A scenario ran to completion but its statistical checks failed.
    Statistical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Statistical(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
            CliError::Statistical(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ramanpol_core::Error> for CliError {
    fn from(e: ramanpol_core::Error) -> Self {
        use ramanpol_core::Error;
        match e {
            Error::InvalidConfig(_) | Error::InsufficientData(_) => CliError::Usage(e.to_string()),
            Error::Instability(_) | Error::Domain(_) => CliError::Numerical(e.to_string()),
            Error::Io(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
