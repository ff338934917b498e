use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 2")]
    InvalidDimension(usize),

    #[error("invalid spin: {0}")]
    InvalidSpin(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("point outside the fundamental domain: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numeric contract violated: {0}")]
    NumericContract(String),

    #[error("frame is not informationally complete (smallest eigenvalue {min_eigenvalue:e})")]
    SingularFrame { min_eigenvalue: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unknown kernel family `{0}`")]
    UnknownFamily(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
