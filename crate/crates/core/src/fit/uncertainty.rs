use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{FitResult, TlsFit};
use crate::model::RESONANCE_PARAM_NAMES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSigma {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

/// 1σ uncertainties of fitted and derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uncertainty {
    pub parameters: Vec<ParameterSigma>,
    pub derived: Vec<ParameterSigma>,
}

impl Uncertainty {
    pub fn get(&self, name: &str) -> Option<&ParameterSigma> {
        self.parameters
            .iter()
            .chain(&self.derived)
            .find(|p| p.name == name)
    }
}

/// A fit exposing its covariance and a set of derived quantities, each with
/// the gradient of the derived map with respect to the fitted parameters.
pub trait Uncertain {
    fn parameter_names(&self) -> Vec<&'static str>;
    fn parameter_values(&self) -> Vec<f64>;
    fn parameter_covariance(&self) -> &DMatrix<f64>;
    fn derived_quantities(&self) -> Vec<(&'static str, f64, Vec<f64>)>;
}

/// First-order (delta-method) variance gᵀ Σ g.
pub fn delta_method_variance(cov: &DMatrix<f64>, gradient: &[f64]) -> f64 {
    let g = DVector::from_column_slice(gradient);
    (g.transpose() * cov * &g)[(0, 0)]
}

/// Square roots of the covariance diagonal; tiny negative round-off is clamped.
pub fn diagonal_sigmas(cov: &DMatrix<f64>) -> Vec<f64> {
    (0..cov.nrows()).map(|k| cov[(k, k)].max(0.0).sqrt()).collect()
}

pub fn propagate_uncertainty<U: Uncertain + ?Sized>(fit: &U) -> Uncertainty {
    let cov = fit.parameter_covariance();
    let parameters = fit
        .parameter_names()
        .into_iter()
        .zip(fit.parameter_values())
        .zip(diagonal_sigmas(cov))
        .map(|((name, value), sigma)| ParameterSigma {
            name: name.to_string(),
            value,
            sigma,
        })
        .collect();
    let derived = fit
        .derived_quantities()
        .into_iter()
        .map(|(name, value, grad)| ParameterSigma {
            name: name.to_string(),
            value,
            sigma: delta_method_variance(cov, &grad).max(0.0).sqrt(),
        })
        .collect();
    Uncertainty {
        parameters,
        derived,
    }
}

impl Uncertain for FitResult {
    fn parameter_names(&self) -> Vec<&'static str> {
        RESONANCE_PARAM_NAMES.to_vec()
    }

    fn parameter_values(&self) -> Vec<f64> {
        let (p, b) = (&self.params, &self.background);
        vec![
            p.f_r,
            p.q_l,
            p.qc_mag,
            p.phi,
            b.amplitude,
            b.phase_offset,
            b.cable_delay,
        ]
    }

    fn parameter_covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    fn derived_quantities(&self) -> Vec<(&'static str, f64, Vec<f64>)> {
        let p = &self.params;
        let delta_i = 1.0 / p.q_l - p.phi.cos() / p.qc_mag;
        let grad = vec![
            0.0,
            -1.0 / (p.q_l * p.q_l),
            p.phi.cos() / (p.qc_mag * p.qc_mag),
            p.phi.sin() / p.qc_mag,
            0.0,
            0.0,
            0.0,
        ];
        // Q_i = 1/δ_i ⇒ ∇Q_i = −∇δ_i / δ_i²
        let q_grad = grad.iter().map(|g| -g / (delta_i * delta_i)).collect();
        vec![("delta_i", delta_i, grad), ("q_i", 1.0 / delta_i, q_grad)]
    }
}

impl Uncertain for TlsFit {
    fn parameter_names(&self) -> Vec<&'static str> {
        self.param_names().to_vec()
    }

    fn parameter_values(&self) -> Vec<f64> {
        let p = &self.params;
        let mut v = vec![p.f_delta0, p.delta_other, p.n_c];
        if self.beta_free {
            v.push(p.beta);
        }
        v
    }

    fn parameter_covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    fn derived_quantities(&self) -> Vec<(&'static str, f64, Vec<f64>)> {
        let k = self.covariance.nrows();
        let mut lp = vec![0.0; k];
        lp[0] = self.params.thermal_factor();
        lp[1] = 1.0;
        let mut qmax = vec![0.0; k];
        qmax[1] = -self.q_max * self.q_max;
        vec![("delta_lp", self.delta_lp, lp), ("q_max", self.q_max, qmax)]
    }
}
