//! Physical forward models.
//!
//! Every function here is pure; the types are plain values that validate
//! their invariants on construction.

mod circuit;
mod resonance;
mod tls;
mod trace;

pub use circuit::{feed_power_for_photons, photon_number, resonance_frequency};
pub use resonance::{
    internal_loss, s21_forward, s21_jacobian, BackgroundModel, InternalLoss, ResonanceParams,
    RESONANCE_PARAM_NAMES,
};
pub(crate) use resonance::wrap_phase;
pub use tls::{thermal_factor, tls_jacobian, tls_loss, PowerSweepPoint, TlsParams};
pub use trace::{FrequencyTrace, TraceMetadata, MIN_TRACE_POINTS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// δ_i = 1/Q_l − cos φ/|Q_c| came out non-positive.
    #[error("non-physical fit: internal loss {delta_i:e} is not positive")]
    NonPhysicalFit { delta_i: f64 },
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), ModelError> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::InvalidParams(msg()))
    }
}
