use thiserror::Error;

/// Errors raised by the split quasimorphism toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element {element} is not valid for {descriptor}")]
    InvalidElement { element: String, descriptor: String },

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("invalid factor descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("operation requires a finite group, got {0}")]
    InfiniteGroup(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown generator `{token}` at position {position}")]
    UnknownGenerator { token: String, position: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("inverse check failed: {0}")]
    InverseCheck(String),

    /// A proven identity failed to hold; always a bug signal.
    #[error("identity violated: {0}")]
    IdentityViolation(String),

    #[error("witness search exhausted: {0}")]
    SearchExhausted(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
