use thiserror::Error;

/// Error type shared by every module of the crate.
///
/// The split between variants mirrors how callers react to them: `Parameter`
/// and `Config` are caught before any computation starts, `Format` points at
/// a malformed or unreadable input file, and `Io` is reserved for failures
/// while writing outputs.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside its domain (`alpha <= 0`, `mu` outside
    /// `[0, 1]`, a division that would hit zero, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A configuration is internally inconsistent (policy/environment family
    /// mismatch, `tau < K` for a forced round-robin policy, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An input file is missing, unreadable or malformed. The message always
    /// names the offending path.
    #[error("input format: {0}")]
    Format(String),

    /// Failure writing an output file.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
