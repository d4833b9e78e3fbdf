use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{require, ModelError};

/// Parameter order used by [`s21_jacobian`] and the resonance fit covariance.
pub const RESONANCE_PARAM_NAMES: [&str; 7] = ["f_r", "q_l", "qc_mag", "phi", "a", "alpha", "tau"];

/// Notch-resonator lineshape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceParams {
    /// Resonance frequency, Hz.
    pub f_r: f64,
    /// Loaded quality factor.
    pub q_l: f64,
    /// Magnitude of the complex coupling quality factor.
    pub qc_mag: f64,
    /// Impedance-mismatch asymmetry angle, rad.
    pub phi: f64,
}

impl ResonanceParams {
    pub fn new(f_r: f64, q_l: f64, qc_mag: f64, phi: f64) -> Result<Self, ModelError> {
        let p = Self {
            f_r,
            q_l,
            qc_mag,
            phi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.f_r > 0.0 && self.f_r.is_finite(), || {
            format!("f_r = {} must be positive", self.f_r)
        })?;
        require(self.q_l > 0.0 && self.q_l.is_finite(), || {
            format!("Q_l = {} must be positive", self.q_l)
        })?;
        require(self.qc_mag > 0.0 && self.qc_mag.is_finite(), || {
            format!("|Q_c| = {} must be positive", self.qc_mag)
        })?;
        require(self.phi.abs() < FRAC_PI_2, || {
            format!("|phi| = {} must be below pi/2", self.phi.abs())
        })
    }

    /// Full width at half depth, Hz.
    pub fn linewidth(&self) -> f64 {
        self.f_r / self.q_l
    }

    /// Diameter of the resonance circle, Q_l/|Q_c|.
    pub fn diameter(&self) -> f64 {
        self.q_l / self.qc_mag
    }
}

/// Environment factor a·e^{iα}·e^{−2πifτ} multiplying the bare resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundModel {
    pub amplitude: f64,
    /// Phase offset, rad, in (−π, π].
    pub phase_offset: f64,
    /// Cable delay, s.
    pub cable_delay: f64,
}

impl BackgroundModel {
    pub const IDENTITY: Self = Self {
        amplitude: 1.0,
        phase_offset: 0.0,
        cable_delay: 0.0,
    };

    /// Builds a background, folding the phase offset into (−π, π].
    pub fn new(amplitude: f64, phase_offset: f64, cable_delay: f64) -> Result<Self, ModelError> {
        require(amplitude > 0.0 && amplitude.is_finite(), || {
            format!("background amplitude {amplitude} must be positive")
        })?;
        require(phase_offset.is_finite() && cable_delay.is_finite(), || {
            "background phase and delay must be finite".into()
        })?;
        Ok(Self {
            amplitude,
            phase_offset: wrap_phase(phase_offset),
            cable_delay,
        })
    }

    pub fn at(&self, f: f64) -> Complex64 {
        Complex64::from_polar(
            self.amplitude,
            self.phase_offset - 2.0 * PI * f * self.cable_delay,
        )
    }
}

/// Wraps an angle into (−π, π].
pub(crate) fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Complex transmission of a notch resonator seen through the background:
///
/// `S21(f) = a e^{iα} e^{−2πifτ} [1 − (Q_l/|Q_c|) e^{iφ} / (1 + 2i Q_l (f/f_r − 1))]`
pub fn s21_forward(f: f64, res: &ResonanceParams, bg: &BackgroundModel) -> Complex64 {
    bg.at(f) * (1.0 - coupling_term(f, res))
}

fn coupling_term(f: f64, res: &ResonanceParams) -> Complex64 {
    let g = Complex64::new(1.0, 2.0 * res.q_l * (f / res.f_r - 1.0));
    Complex64::from_polar(res.diameter(), res.phi) / g
}

/// Analytic derivatives of [`s21_forward`] in [`RESONANCE_PARAM_NAMES`] order.
pub fn s21_jacobian(f: f64, res: &ResonanceParams, bg: &BackgroundModel) -> [Complex64; 7] {
    let i = Complex64::i();
    let b = bg.at(f);
    let g = Complex64::new(1.0, 2.0 * res.q_l * (f / res.f_r - 1.0));
    let h = Complex64::from_polar(res.diameter(), res.phi) / g;
    let s = b * (1.0 - h);
    let bh = b * h;
    [
        -bh * i * 2.0 * res.q_l * f / (res.f_r * res.f_r * g),
        -bh / (res.q_l * g),
        bh / res.qc_mag,
        -i * bh,
        s / bg.amplitude,
        i * s,
        -i * 2.0 * PI * f * s,
    ]
}

/// Internal loss δ_i together with Q_i = 1/δ_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InternalLoss {
    pub delta_i: f64,
    pub q_i: f64,
}

/// δ_i = 1/Q_l − cos φ/|Q_c|, the diameter-corrected internal loss.
pub fn internal_loss(res: &ResonanceParams) -> Result<InternalLoss, ModelError> {
    let delta_i = 1.0 / res.q_l - res.phi.cos() / res.qc_mag;
    if !(delta_i > 0.0) {
        return Err(ModelError::NonPhysicalFit { delta_i });
    }
    Ok(InternalLoss {
        delta_i,
        q_i: 1.0 / delta_i,
    })
}
