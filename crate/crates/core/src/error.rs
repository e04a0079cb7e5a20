//! Error type shared across the simulation core.

/// Failures the core can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is outside its valid domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The explicit integrator left its stability region, or field values
    /// overflowed during propagation.
    #[error("numerical instability: {0}")]
    Instability(String),

    /// A function argument is outside the domain the implementation covers.
    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough data to run the requested statistical procedure.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Underlying I/O failure while reading or writing artifacts.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
