use nalgebra::DMatrix;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, AsprError>;

#[derive(Debug, Error)]
pub enum AsprError {
    #[error("matrix is not symmetric positive definite ({reason}): {matrix}")]
    NotSpd {
        reason: String,
        matrix: DMatrix<f64>,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("EM failed: {0}")]
    EmFailed(String),

    #[error("cross-validation failed: {0}")]
    CrossValidation(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl AsprError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        AsprError::InvalidParameter(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        AsprError::Dimension(msg.into())
    }
}
