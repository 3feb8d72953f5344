use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    BadSubsystem { index: usize, count: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("negative eigenvalue {0:.3e} beyond tolerance")]
    NegativeEigenvalue(f64),

    #[error("invalid trace {0}: states must have trace in (0, 1]")]
    InvalidTrace(f64),

    #[error("state is not normalized (trace {0})")]
    NotNormalized(f64),

    #[error("vector is not unit norm (norm {0})")]
    NotUnitNorm(f64),

    #[error("kraus completeness violated (deviation {0:.3e})")]
    KrausCompleteness(f64),

    #[error("not a partial isometry (deviation {0:.3e})")]
    NotPartialIsometry(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular conditioning operator: {0}")]
    Singular(String),

    #[error("semidefinite solver failed: {0}")]
    Solver(String),

    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("budget exhausted: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
