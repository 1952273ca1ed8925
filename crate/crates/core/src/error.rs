use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `A Aᵀ` of a descriptor is singular (BPSK has coincident rows).
    #[error("gram matrix A·Aᵀ is singular (determinant {det:.3e})")]
    SingularGram { det: f64 },

    #[error("metric is undefined: {0}")]
    UndefinedMetric(String),
}

pub type Result<T> = std::result::Result<T, SlpError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SlpError {
    SlpError::InvalidArgument(msg.into())
}
