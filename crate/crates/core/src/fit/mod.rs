//! Resonance and power-sweep fitting.
//!
//! The resonance fit is staged: cable delay and background from the sweep
//! wings, an algebraic circle fit of the normalised trace, a phase fit of the
//! centred circle, and finally a joint Levenberg–Marquardt refinement of all
//! seven lineshape parameters against the complex residuals.

mod background;
mod circle;
mod config;
mod lm;
mod phase;
mod power_sweep;
mod resonance;
mod uncertainty;

pub use background::estimate_background;
pub use circle::{circle_fit, Circle};
pub use config::{BetaMode, FitConfig, Weighting};
pub use lm::{
    lm_minimize, numerical_jacobian, FnProblem, LeastSquares, LmDiagnostics, LmSolution,
    Termination,
};
pub use phase::{phase_fit, phase_jacobian, phase_model, PhaseFit};
pub use power_sweep::{fit_power_sweep, TlsFit, TLS_PARAM_NAMES};
pub use resonance::{fit_resonance, FitResult};
pub use uncertainty::{propagate_uncertainty, ParameterSigma, Uncertain, Uncertainty};

use thiserror::Error;

use crate::model::ModelError;

/// Best-effort result carried by [`FitError::NotConverged`].
#[derive(Debug, Clone)]
pub enum Partial {
    Lm(Box<LmSolution>),
    Resonance(Box<FitResult>),
    Tls(Box<TlsFit>),
}

#[derive(Debug, Clone, Error)]
pub enum FitError {
    #[error("only {per_side} wing points per side, at least {required} required")]
    InsufficientWings { per_side: usize, required: usize },
    #[error("points are collinear or coincident; no circle can be fitted")]
    DegenerateGeometry,
    #[error("no resonance found: total phase winding {winding:.3} rad is below pi/2")]
    NoResonance { winding: f64 },
    #[error("non-physical fit: {0}")]
    NonPhysicalFit(String),
    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize, partial: Partial },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("saturation not resolved; critical photon number is at least {n_c_lower_bound:e}")]
    UnidentifiableSaturation { n_c_lower_bound: f64 },
    #[error("residuals are not finite at the initial point")]
    NonFiniteResidual,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl FitError {
    pub fn partial(&self) -> Option<&Partial> {
        match self {
            FitError::NotConverged { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Mixes a base seed with a task label (FNV-1a), giving a stable per-task seed
/// independent of scheduling order.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
