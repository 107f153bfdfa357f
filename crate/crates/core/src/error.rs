use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad user input: config files, tabulated bases, CLI arguments.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical precondition failed (non-PD Gram, degenerate frame, ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Shape or grid mismatch between objects that must agree.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::Mismatch(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for this error class: 2 for configuration and
    /// input problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            Error::Numeric(_) | Error::Mismatch(_) | Error::Unsupported(_) => 3,
        }
    }
}
