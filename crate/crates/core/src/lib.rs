//! Loss extraction and inverse design for superconducting notch resonators.
//!
//! The crate is organised around five pieces:
//!
//! - [`model`]: forward models (notch S21 lineshape, internal loss, TLS
//!   saturation law, intracavity photon number, lumped LC resonance).
//! - [`fit`]: the staged resonance fit (background, circle, phase, joint
//!   Levenberg–Marquardt refinement) and the power-sweep TLS fit, both with
//!   covariance-based uncertainties.
//! - [`design`]: lumped-element parallel-plate-capacitor resonator design.
//! - [`synth`]: seeded generators of traces and sweeps with known ground truth.
//! - [`io`]: Touchstone and CSV ingestion, JSON/CSV reports, and the bundled
//!   dielectric-loss benchmark catalog.
//!
//! [`campaign`] ties them together for batch processing of measurement
//! directories. All quantities are SI internally; dBm only appears at the
//! I/O boundary.

pub mod campaign;
pub mod constants;
pub mod design;
pub mod fit;
pub mod io;
pub mod model;
pub mod synth;

mod error;

pub use error::{Error, Result};
