use serde::{Deserialize, Serialize};

use super::FitError;

/// Whether the TLS saturation exponent is held fixed or fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    Fixed(f64),
    Free,
}

impl std::str::FromStr for BetaMode {
    type Err = String;

    /// Accepts `free` or `fixed:<value>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("free") {
            return Ok(BetaMode::Free);
        }
        match s.split_once(':') {
            Some((k, v)) if k.eq_ignore_ascii_case("fixed") => v
                .trim()
                .parse::<f64>()
                .map(BetaMode::Fixed)
                .map_err(|e| format!("bad beta value {v:?}: {e}")),
            _ => Err(format!("expected `free` or `fixed:<beta>`, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    InverseVariance,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Bound on the cosine between the residual vector and every Jacobian column.
    pub gradient_tolerance: f64,
    /// Relative bound on the scaled step length.
    pub step_tolerance: f64,
    /// Relative bound on the actual and predicted cost reduction.
    pub function_tolerance: f64,
    /// Fraction of points at each sweep edge used for background estimation.
    pub wing_fraction: f64,
    pub beta_mode: BetaMode,
    pub weighting: Weighting,
    pub seed: u64,
    /// Jittered restarts attempted when the joint refinement fails.
    pub restarts: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-12,
            function_tolerance: 1e-14,
            wing_fraction: 0.1,
            beta_mode: BetaMode::Fixed(1.0),
            weighting: Weighting::InverseVariance,
            seed: 0,
            restarts: 2,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        let bad = |m: &str| Err(FitError::InvalidConfig(m.to_string()));
        if !(self.wing_fraction > 0.0 && self.wing_fraction <= 0.25) {
            return bad("wing_fraction must lie in (0, 0.25]");
        }
        if !(self.gradient_tolerance > 0.0
            && self.step_tolerance > 0.0
            && self.function_tolerance > 0.0)
        {
            return bad("tolerances must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if let BetaMode::Fixed(b) = self.beta_mode {
            if !(b > 0.0 && b <= 2.0) {
                return bad("fixed beta must lie in (0, 2]");
            }
        }
        Ok(())
    }
}
