//! Error type shared by all modules.

/// Errors raised by the simulation and analysis chain.
///
/// The variants map onto distinct process exit codes in the CLI:
/// configuration problems are recoverable by editing the input file,
/// domain and numerical failures indicate the requested operating point
/// cannot be evaluated, and schema errors come from malformed trace files.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Physically invalid input (negative length, current above `I_c`, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or incomplete configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Numerical failure (stiff system, overflow, bracket not found, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed trace file.
    #[error("trace schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
