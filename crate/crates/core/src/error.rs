use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular")]
    Singular,

    #[error("exact path needs tau_j = log N_j with N_j rational: {0}")]
    NonLogRational(String),

    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("enumeration exceeded the node budget of {0}")]
    NodeBudget(u64),

    #[error("operation requires the exact backend: {0}")]
    ExactRequired(String),

    #[error("matrix is not unimodular: {0}")]
    NotUnimodular(String),

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("curve is not affinely spanning: {0}")]
    NotAffineBasis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
