//! Seeded synthetic data with known ground truth.
//!
//! All generators draw from ChaCha8 (`rand_chacha` 0.9) seeded with
//! `seed_from_u64`, and Gaussian samples from `rand_distr::StandardNormal`
//! (ziggurat). Both crates are pinned by the lockfile, so a seed reproduces
//! the same sample stream on every platform.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    s21_forward, tls_loss, BackgroundModel, FrequencyTrace, ModelError, PowerSweepPoint,
    ResonanceParams, TlsParams, TraceMetadata, MIN_TRACE_POINTS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("grid spans {linewidths:.2} linewidths around the resonance, at least 6 required")]
    GridTooNarrow { linewidths: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    /// Circular complex Gaussian with E|n|² = σ² (σ/√2 per quadrature). On a
    /// power sweep, additive Gaussian noise of standard deviation σ.
    IsotropicComplex { sigma: f64 },
    /// Multiplicative: x(1 + fraction·g), g standard normal (complex
    /// circular for traces).
    Relative { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseModel {
    pub const NONE: Self = Self {
        kind: NoiseKind::None,
        seed: 0,
    };

    pub fn isotropic(sigma: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::IsotropicComplex { sigma },
            seed,
        }
    }

    pub fn relative(fraction: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::Relative { fraction },
            seed,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn validate(&self) -> Result<(), SynthError> {
        match self.kind {
            NoiseKind::IsotropicComplex { sigma } if !(sigma >= 0.0) => {
                Err(SynthError::InvalidGrid(format!("noise sigma {sigma} is negative")))
            }
            NoiseKind::Relative { fraction } if !(fraction >= 0.0) => {
                Err(SynthError::InvalidGrid(format!("noise fraction {fraction} is negative")))
            }
            _ => Ok(()),
        }
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Linear frequency grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FrequencyGrid {
    /// Grid of `count` points spanning `linewidths` linewidths centred on f_r.
    pub fn around(res: &ResonanceParams, linewidths: f64, count: usize) -> Self {
        let half = 0.5 * linewidths * res.linewidth();
        Self {
            start: res.f_r - half,
            stop: res.f_r + half,
            count,
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Log-spaced grid from `start` to `stop` with `per_decade` points per decade.
pub fn log_grid(start: f64, stop: f64, per_decade: usize) -> Vec<f64> {
    let decades = (stop / start).log10();
    let steps = (decades * per_decade as f64).round() as usize;
    (0..=steps)
        .map(|i| start * 10f64.powf(decades * i as f64 / steps as f64))
        .collect()
}

/// Synthetic complex transmission sweep of a notch resonator.
#[allow(clippy::too_many_arguments)]
pub fn synth_trace(
    res: &ResonanceParams,
    bg: &BackgroundModel,
    grid: FrequencyGrid,
    noise: NoiseModel,
    power: Option<f64>,
    temperature: Option<f64>,
    label: &str,
) -> Result<FrequencyTrace, SynthError> {
    res.validate()?;
    noise.validate()?;
    if grid.count < MIN_TRACE_POINTS || !(grid.stop > grid.start) || !(grid.start > 0.0) {
        return Err(SynthError::InvalidGrid(format!(
            "need at least {MIN_TRACE_POINTS} points over an increasing positive range"
        )));
    }
    let linewidths = (grid.stop - grid.start) / res.linewidth();
    let quarter = 0.25 * (grid.stop - grid.start);
    let centred = res.f_r > grid.start + quarter && res.f_r < grid.stop - quarter;
    if linewidths < 6.0 || !centred {
        return Err(SynthError::GridTooNarrow { linewidths });
    }
    let mut rng = noise.rng();
    let freqs = grid.frequencies();
    let z = freqs
        .iter()
        .map(|&f| {
            let clean = s21_forward(f, res, bg);
            match noise.kind {
                NoiseKind::None => clean,
                NoiseKind::IsotropicComplex { sigma } => clean + sigma * complex_normal(&mut rng),
                NoiseKind::Relative { fraction } => clean * (1.0 + fraction * complex_normal(&mut rng)),
            }
        })
        .collect();
    let mut meta = TraceMetadata::new(label);
    meta.applied_power = power;
    meta.temperature = temperature;
    Ok(FrequencyTrace::new(freqs, z, meta)?)
}

/// Power sweep δ_i(n) drawn from the TLS law.
///
/// Each point's σ is the noise scale at that point (0 without noise). Draws
/// that would make δ_i non-positive are redrawn.
pub fn synth_power_sweep(
    p: &TlsParams,
    photon_numbers: &[f64],
    noise: NoiseModel,
) -> Result<Vec<PowerSweepPoint>, SynthError> {
    p.validate()?;
    noise.validate()?;
    if photon_numbers.windows(2).any(|w| w[1] <= w[0]) || photon_numbers.iter().any(|&n| !(n > 0.0)) {
        return Err(SynthError::InvalidGrid("photon numbers must be positive and increasing".into()));
    }
    let mut rng = noise.rng();
    photon_numbers
        .iter()
        .map(|&n| {
            let (value, sigma) = perturb(tls_loss(n, p), noise.kind, &mut rng);
            Ok(PowerSweepPoint::new(n, value, sigma)?)
        })
        .collect()
}

/// Draws a positive noisy copy of `clean`; returns it with its noise scale.
fn perturb(clean: f64, kind: NoiseKind, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let sigma = match kind {
        NoiseKind::None => 0.0,
        NoiseKind::IsotropicComplex { sigma } => sigma,
        NoiseKind::Relative { fraction } => fraction * clean,
    };
    if sigma == 0.0 {
        return (clean, 0.0);
    }
    loop {
        let g: f64 = StandardNormal.sample(rng);
        let value = clean + sigma * g;
        if value > 0.0 {
            return (value, sigma);
        }
    }
}

/// δ_i(T) at a fixed photon number, with noise drawn as for a power sweep.
///
/// Only the tanh(hf/2k_BT) dependence is modelled; plateaus or other
/// temperature structure seen in real devices are not reproduced.
pub fn synth_temperature_sweep(
    p: &TlsParams,
    temperatures: &[f64],
    photon_number: f64,
    noise: NoiseModel,
) -> Result<Vec<(f64, f64)>, SynthError> {
    p.validate()?;
    noise.validate()?;
    if temperatures.windows(2).any(|w| w[1] <= w[0]) || temperatures.iter().any(|&t| !(t > 0.0)) {
        return Err(SynthError::InvalidGrid("temperatures must be positive and increasing".into()));
    }
    let mut rng = noise.rng();
    Ok(temperatures
        .iter()
        .map(|&t| {
            let at = TlsParams { temperature: t, ..*p };
            (t, perturb(tls_loss(photon_number, &at), noise.kind, &mut rng).0)
        })
        .collect())
}
