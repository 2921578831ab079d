use thiserror::Error;

/// Errors raised by the spectral solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("collar too wide: metric pinch delta = {delta} is not below 1")]
    CollarTooWide { delta: f64 },

    #[error("integration failure at r = {r}: {reason}")]
    IntegrationFailure { r: f64, reason: String },

    #[error("no root bracketed in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, SpectraError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(SpectraError::Domain(msg.into()))
}
