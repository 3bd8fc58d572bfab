use thiserror::Error;

use crate::spin::StateLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, target {target:e})")]
    NotConverged { sweeps: usize, off_norm: f64, target: f64 },

    #[error("field {field_t} T exceeds the low-field labeling bound {bound_t} T")]
    FieldTooHigh { field_t: f64, bound_t: f64 },

    #[error("ambiguous state labeling at {field_t} T: {detail}")]
    AmbiguousLabel { field_t: f64, detail: String },

    #[error("transition {from} -> {to} cannot be tracked at {field_t} T")]
    LabelTracking { from: StateLabel, to: StateLabel, field_t: f64 },

    #[error("fit failed: {0}")]
    Fit(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {value}")))
    }
}
