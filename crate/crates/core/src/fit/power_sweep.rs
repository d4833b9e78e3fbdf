use nalgebra::{DMatrix, DVector};

use super::{lm_minimize, BetaMode, FitConfig, FitError, LeastSquares, LmDiagnostics, Partial, Weighting};
use crate::model::{thermal_factor, tls_jacobian, tls_loss, PowerSweepPoint, TlsParams};

/// Covariance order of a TLS fit; β is present only when fitted.
pub const TLS_PARAM_NAMES: [&str; 4] = ["f_delta0", "delta_other", "n_c", "beta"];

const MIN_SWEEP_POINTS: usize = 6;

/// Outcome of a power-sweep TLS fit.
#[derive(Debug, Clone)]
pub struct TlsFit {
    pub params: TlsParams,
    /// Covariance over (Fδ⁰, δ_other, n_c[, β]).
    pub covariance: DMatrix<f64>,
    pub beta_free: bool,
    /// Total loss in the n → 0 limit.
    pub delta_lp: f64,
    /// 1/δ_other.
    pub q_max: f64,
    pub weighting: Weighting,
    pub residual_norm: f64,
    pub converged: bool,
    pub diagnostics: LmDiagnostics,
}

impl TlsFit {
    pub fn param_names(&self) -> &'static [&'static str] {
        if self.beta_free {
            &TLS_PARAM_NAMES
        } else {
            &TLS_PARAM_NAMES[..3]
        }
    }

    pub fn predict(&self, n: f64) -> f64 {
        tls_loss(n, &self.params)
    }
}

struct SweepProblem<'a> {
    points: &'a [PowerSweepPoint],
    weights: Vec<f64>,
    frequency: f64,
    temperature: f64,
    fixed_beta: Option<f64>,
}

impl SweepProblem<'_> {
    /// Internal vector: (Fδ⁰, δ_other, ln n_c[, β]).
    fn params(&self, x: &DVector<f64>) -> TlsParams {
        TlsParams {
            f_delta0: x[0],
            delta_other: x[1],
            n_c: x[2].exp(),
            beta: self.fixed_beta.unwrap_or_else(|| x[3]),
            frequency: self.frequency,
            temperature: self.temperature,
        }
    }
}

impl LeastSquares for SweepProblem<'_> {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let p = self.params(x);
        DVector::from_iterator(
            self.points.len(),
            self.points
                .iter()
                .zip(&self.weights)
                .map(|(pt, w)| w * (tls_loss(pt.photon_number, &p) - pt.delta_i)),
        )
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let p = self.params(x);
        let mut j = DMatrix::zeros(self.points.len(), x.len());
        for (i, (pt, w)) in self.points.iter().zip(&self.weights).enumerate() {
            let d = tls_jacobian(pt.photon_number, &p);
            j[(i, 0)] = w * d[0];
            j[(i, 1)] = w * d[1];
            j[(i, 2)] = w * d[2] * p.n_c;
            if x.len() == 4 {
                j[(i, 3)] = w * d[3];
            }
        }
        j
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Fits the saturable TLS loss law to a power sweep.
///
/// Weights are 1/σ² when `cfg.weighting` is inverse-variance and every point
/// carries σ > 0; otherwise the fit is unweighted and the covariance is scaled
/// by the residual variance. With known σ the covariance is absolute, so
/// rescaling all σ by c rescales the covariance by c² and leaves the
/// parameters unchanged.
pub fn fit_power_sweep(
    sweep: &[PowerSweepPoint],
    frequency: f64,
    temperature: f64,
    cfg: &FitConfig,
) -> Result<TlsFit, FitError> {
    cfg.validate()?;
    if sweep.len() < MIN_SWEEP_POINTS {
        return Err(FitError::InsufficientData(format!(
            "{} sweep points, at least {MIN_SWEEP_POINTS} required",
            sweep.len()
        )));
    }
    let mut points = sweep.to_vec();
    points.sort_by(|a, b| a.photon_number.total_cmp(&b.photon_number));
    let n_min = points[0].photon_number;
    let n_max = points[points.len() - 1].photon_number;
    if !(n_max / n_min >= 100.0) {
        return Err(FitError::InsufficientData(format!(
            "photon numbers span {:.2} decades, at least 2 required",
            (n_max / n_min).log10()
        )));
    }

    let weighted = cfg.weighting == Weighting::InverseVariance && points.iter().all(|p| p.sigma > 0.0);
    let edge = (points.len() / 10).max(3);
    let plateau = mean(points[..edge].iter().map(|p| p.delta_i));
    let floor = mean(points[points.len() - edge..].iter().map(|p| p.delta_i));

    // Point scatter when σ is unknown: successive differences over √2.
    let scatter = {
        let d: Vec<f64> = points.windows(2).map(|w| w[1].delta_i - w[0].delta_i).collect();
        (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64 / 2.0).sqrt()
    };
    let departs = points.iter().any(|p| {
        let sigma = if weighted { p.sigma } else { scatter };
        plateau - p.delta_i > 3.0 * sigma
    });
    if !departs {
        return Err(FitError::UnidentifiableSaturation {
            n_c_lower_bound: n_max,
        });
    }

    let th = thermal_factor(frequency, temperature);
    let delta_other0 = if floor > 0.0 { floor } else { 0.5 * plateau.abs() };
    let tls0 = (plateau - delta_other0).max(1e-3 * plateau.abs());
    let n_c0 = points
        .iter()
        .find(|p| p.delta_i - delta_other0 < tls0 / std::f64::consts::SQRT_2)
        .map_or(n_max, |p| p.photon_number);

    let weights: Vec<f64> = if weighted {
        points.iter().map(|p| 1.0 / p.sigma).collect()
    } else {
        vec![1.0 / plateau.abs(); points.len()]
    };
    let fixed_beta = match cfg.beta_mode {
        BetaMode::Fixed(b) => Some(b),
        BetaMode::Free => None,
    };
    let problem = SweepProblem {
        points: &points,
        weights,
        frequency,
        temperature,
        fixed_beta,
    };
    let mut x0 = vec![tls0 / th, delta_other0, n_c0.ln()];
    if fixed_beta.is_none() {
        x0.push(1.0);
    }

    let (sol, converged) = match lm_minimize(&problem, DVector::from_vec(x0), cfg) {
        Ok(sol) => (sol, true),
        Err(FitError::NotConverged {
            partial: Partial::Lm(sol),
            ..
        }) => (*sol, false),
        Err(e) => return Err(e),
    };

    let params = problem.params(&sol.params);
    let k = sol.params.len();
    let raw_cov = if weighted {
        &sol.unscaled_covariance
    } else {
        &sol.covariance
    };
    let jac = DVector::from_fn(k, |i, _| if i == 2 { params.n_c } else { 1.0 });
    let covariance = DMatrix::from_fn(k, k, |i, j| raw_cov[(i, j)] * jac[i] * jac[j]);
    let fit = TlsFit {
        params,
        covariance,
        beta_free: fixed_beta.is_none(),
        delta_lp: params.low_power_loss(),
        q_max: 1.0 / params.delta_other,
        weighting: if weighted {
            Weighting::InverseVariance
        } else {
            Weighting::Uniform
        },
        residual_norm: sol.residuals.norm(),
        converged,
        diagnostics: sol.diagnostics,
    };
    if !converged {
        let iterations = fit.diagnostics.iterations;
        return Err(FitError::NotConverged {
            iterations,
            partial: Partial::Tls(Box::new(fit)),
        });
    }
    if let Err(e) = params.validate() {
        return Err(FitError::NonPhysicalFit(e.to_string()));
    }
    if params.delta_other <= 0.0 {
        return Err(FitError::NonPhysicalFit(
            "power-independent loss is not positive".into(),
        ));
    }
    Ok(fit)
}
