use thiserror::Error;

/// Structural problems with an instance or schedule: bad dimensions or
/// values outside their domain. Infeasibility is reported separately.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid platform: {0}")]
    Platform(String),
    #[error("invalid load set: {0}")]
    Loads(String),
    #[error("invalid installment plan: {0}")]
    Plan(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid fractions: {0}")]
    Fractions(String),
}
