use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series did not converge after {terms} terms: {what}")]
    NonConvergence { what: String, terms: usize },
    #[error("eigensolver failed to converge at index {index}")]
    Eigen { index: usize },
    #[error("value saturated double range at index {index}")]
    Saturation { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("surface build failed: {0}")]
    Build(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
