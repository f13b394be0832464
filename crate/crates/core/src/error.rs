use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown policy id `{0}`")]
    UnknownPolicy(String),
    #[error("trace parse error at line {line}: {message}")]
    TraceParse { line: usize, message: String },
    #[error("trace format version {found} is not supported (expected {expected})")]
    TraceVersion { found: u32, expected: u32 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsFault),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that stem from bad input rather than a fault during execution.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::UnknownPolicy(_)
                | Error::TraceParse { .. }
                | Error::TraceVersion { .. }
        )
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
