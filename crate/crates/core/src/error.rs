use thiserror::Error;

/// Errors produced by the core contracts.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("cannot sample unbounded space")]
    UnboundedSample,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite gradient")]
    NonFiniteGradient,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unknown {kind} '{name}'; valid options: {options}")]
    UnknownIdentifier {
        kind: String,
        name: String,
        options: String,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
