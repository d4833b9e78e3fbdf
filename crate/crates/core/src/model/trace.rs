use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ModelError;

pub const MIN_TRACE_POINTS: usize = 16;

/// Acquisition metadata. Touchstone files cannot carry power or temperature,
/// so both stay unknown until supplied from a manifest or the command line.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub label: String,
    /// Applied feedline power, W.
    pub applied_power: Option<f64>,
    /// Mixing-chamber temperature, K.
    pub temperature: Option<f64>,
}

impl TraceMetadata {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    pub fn with_power(mut self, watts: f64) -> Self {
        self.applied_power = Some(watts);
        self
    }

    pub fn with_temperature(mut self, kelvin: f64) -> Self {
        self.temperature = Some(kelvin);
        self
    }
}

/// One complex transmission sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrace {
    frequencies: Vec<f64>,
    transmission: Vec<Complex64>,
    pub metadata: TraceMetadata,
}

impl FrequencyTrace {
    pub fn new(
        frequencies: Vec<f64>,
        transmission: Vec<Complex64>,
        metadata: TraceMetadata,
    ) -> Result<Self, ModelError> {
        let bad = |m: String| Err(ModelError::InvalidTrace(m));
        if frequencies.len() != transmission.len() {
            return bad(format!(
                "{} frequencies but {} transmission values",
                frequencies.len(),
                transmission.len()
            ));
        }
        if frequencies.len() < MIN_TRACE_POINTS {
            return bad(format!(
                "{} points, at least {MIN_TRACE_POINTS} required",
                frequencies.len()
            ));
        }
        if let Some(i) = frequencies.iter().position(|f| !f.is_finite() || *f <= 0.0) {
            return bad(format!("frequency at index {i} is not a positive finite value"));
        }
        if let Some(i) = frequencies.windows(2).position(|w| w[1] <= w[0]) {
            return bad(format!("frequencies not strictly increasing at index {}", i + 1));
        }
        if let Some(i) = transmission.iter().position(|z| !z.is_finite()) {
            return bad(format!("transmission at index {i} is not finite"));
        }
        if matches!(metadata.applied_power, Some(p) if !(p > 0.0 && p.is_finite())) {
            return bad("applied power must be positive".into());
        }
        if matches!(metadata.temperature, Some(t) if !(t > 0.0 && t.is_finite())) {
            return bad("temperature must be positive".into());
        }
        Ok(Self {
            frequencies,
            transmission,
            metadata,
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn transmission(&self) -> &[Complex64] {
        &self.transmission
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.frequencies
            .iter()
            .copied()
            .zip(self.transmission.iter().copied())
    }

    /// Returns a copy with every transmission value mapped through `f`.
    pub fn map_transmission(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        Self {
            frequencies: self.frequencies.clone(),
            transmission: self.points().map(|(fr, z)| f(fr, z)).collect(),
            metadata: self.metadata.clone(),
        }
    }
}
