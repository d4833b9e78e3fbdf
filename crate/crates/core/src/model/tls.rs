use serde::{Deserialize, Serialize};

use super::{require, ModelError};
use crate::constants::{BOLTZMANN, PLANCK};

/// Saturable two-level-system loss law at a given frequency and temperature.
///
/// Only the product Fδ⁰_TLS is represented; the filling factor is never
/// separated from the intrinsic loss tangent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    pub f_delta0: f64,
    /// Power-independent loss.
    pub delta_other: f64,
    /// Critical photon number.
    pub n_c: f64,
    /// Saturation exponent, (0, 2].
    pub beta: f64,
    /// Hz.
    pub frequency: f64,
    /// K.
    pub temperature: f64,
}

impl TlsParams {
    pub fn new(
        f_delta0: f64,
        delta_other: f64,
        n_c: f64,
        beta: f64,
        frequency: f64,
        temperature: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            f_delta0,
            delta_other,
            n_c,
            beta,
            frequency,
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.f_delta0 >= 0.0 && self.f_delta0.is_finite(), || {
            format!("F·delta0 = {} must be non-negative", self.f_delta0)
        })?;
        require(self.delta_other >= 0.0 && self.delta_other.is_finite(), || {
            format!("delta_other = {} must be non-negative", self.delta_other)
        })?;
        require(self.n_c > 0.0 && self.n_c.is_finite(), || {
            format!("n_c = {} must be positive", self.n_c)
        })?;
        require(self.beta > 0.0 && self.beta <= 2.0, || {
            format!("beta = {} must lie in (0, 2]", self.beta)
        })?;
        require(self.frequency > 0.0, || "frequency must be positive".into())?;
        require(self.temperature >= 0.0, || {
            "temperature must be non-negative".into()
        })
    }

    pub fn thermal_factor(&self) -> f64 {
        thermal_factor(self.frequency, self.temperature)
    }

    /// Loss in the n → 0 limit.
    pub fn low_power_loss(&self) -> f64 {
        self.f_delta0 * self.thermal_factor() + self.delta_other
    }
}

/// tanh(hf / 2k_BT); 1 at T = 0.
pub fn thermal_factor(frequency: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 1.0;
    }
    (PLANCK * frequency / (2.0 * BOLTZMANN * temperature)).tanh()
}

/// δ(n) = Fδ⁰ tanh(hf/2k_BT) (1 + n/n_c)^{−β/2} + δ_other
pub fn tls_loss(n: f64, p: &TlsParams) -> f64 {
    let sat = (1.0 + n / p.n_c).powf(-0.5 * p.beta);
    p.f_delta0 * p.thermal_factor() * sat + p.delta_other
}

/// Derivatives of [`tls_loss`] with respect to (Fδ⁰, δ_other, n_c, β).
pub fn tls_jacobian(n: f64, p: &TlsParams) -> [f64; 4] {
    let th = p.thermal_factor();
    let s = 1.0 + n / p.n_c;
    let sat = s.powf(-0.5 * p.beta);
    let tls = p.f_delta0 * th * sat;
    [
        th * sat,
        1.0,
        tls * 0.5 * p.beta * n / (p.n_c * p.n_c * s),
        -0.5 * tls * s.ln(),
    ]
}

/// One point of a power sweep: internal loss at a given photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepPoint {
    pub photon_number: f64,
    pub delta_i: f64,
    /// 1σ uncertainty of `delta_i`; 0 when unknown.
    pub sigma: f64,
}

impl PowerSweepPoint {
    pub fn new(photon_number: f64, delta_i: f64, sigma: f64) -> Result<Self, ModelError> {
        require(photon_number > 0.0 && photon_number.is_finite(), || {
            format!("photon number {photon_number} must be positive")
        })?;
        require(delta_i > 0.0 && delta_i.is_finite(), || {
            format!("delta_i {delta_i} must be positive")
        })?;
        require(sigma >= 0.0 && sigma.is_finite(), || {
            format!("sigma {sigma} must be non-negative")
        })?;
        Ok(Self {
            photon_number,
            delta_i,
            sigma,
        })
    }
}
