use thiserror::Error;

/// Errors raised anywhere in the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("field has {got} points but the grid has {expected}")]
    GridMismatch { expected: usize, got: usize },

    #[error("non-finite field value detected at step {step}")]
    Blowup { step: usize },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error(
        "glue consistency violated between eps={coarse:e} and eps={fine:e} at step {step}"
    )]
    GlueViolation { coarse: f64, fine: f64, step: usize },

    #[error("step {step} is not a stored snapshot (stride {stride})")]
    NotSnapshotted { step: usize, stride: usize },

    #[error("insufficient replicas: need at least {needed}, got {got}")]
    InsufficientReplicas { needed: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing report: {0}")]
    MissingReport(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects NaN, infinities and values `<= 0`.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
