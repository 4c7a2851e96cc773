use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Core(#[from] splitqm_core::Error),
}

impl CliError {
    /// 1 for a violated identity, 2 for usage, parse and validation errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(splitqm_core::Error::IdentityViolation(_)) => 1,
            _ => 2,
        }
    }
}
