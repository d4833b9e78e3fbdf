use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};

use super::{lm_minimize, FitConfig, FitError, LeastSquares};

/// Result of the phase stage: resonance frequency, loaded Q and the phase of
/// the centred circle at resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFit {
    pub f_r: f64,
    pub q_l: f64,
    pub theta0: f64,
}

/// θ(f) = θ₀ + 2 arctan(2 Q_l (1 − f/f_r))
pub fn phase_model(f: f64, f_r: f64, q_l: f64, theta0: f64) -> f64 {
    theta0 + 2.0 * (2.0 * q_l * (1.0 - f / f_r)).atan()
}

/// Derivatives of [`phase_model`] with respect to (f_r, Q_l, θ₀).
pub fn phase_jacobian(f: f64, f_r: f64, q_l: f64) -> [f64; 3] {
    let u = 2.0 * q_l * (1.0 - f / f_r);
    let w = 2.0 / (1.0 + u * u);
    [w * 2.0 * q_l * f / (f_r * f_r), w * 2.0 * (1.0 - f / f_r), 1.0]
}

struct PhaseProblem<'a> {
    data: &'a [(f64, f64)],
}

impl LeastSquares for PhaseProblem<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.data.len(),
            self.data.iter().map(|&(f, th)| phase_model(f, p[0], p[1], p[2]) - th),
        )
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.data.len(), 3);
        for (i, &(f, _)) in self.data.iter().enumerate() {
            let row = phase_jacobian(f, p[0], p[1]);
            for k in 0..3 {
                j[(i, k)] = row[k];
            }
        }
        j
    }
}

/// Unwraps a phase sequence so consecutive samples differ by at most π.
pub(crate) fn unwrap(phases: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for p in phases {
        match out.last() {
            None => out.push(p),
            Some(&prev) => {
                let mut d = p - prev;
                d -= 2.0 * PI * (d / (2.0 * PI)).round();
                out.push(prev + d);
            }
        }
    }
    out
}

/// Starting point: f_r at the steepest smoothed phase slope, Q_l from the
/// ±π/2 crossings around it (or the slope itself when they fall outside).
fn initial_guess(data: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = data.len();
    let k = (n / 100).max(1);
    let (mut best, mut best_slope) = (n / 2, 0.0f64);
    for i in k..n - k {
        let slope = (data[i + k].1 - data[i - k].1) / (data[i + k].0 - data[i - k].0);
        if slope.abs() > best_slope.abs() {
            best = i;
            best_slope = slope;
        }
    }
    let (f_r, theta_r) = data[best];
    // θ falls by π between f_r(1 − 1/2Q) and f_r(1 + 1/2Q)
    let sign = if best_slope <= 0.0 { 1.0 } else { -1.0 };
    let left = data[..=best]
        .iter()
        .rev()
        .find(|&&(_, th)| sign * (th - theta_r) >= FRAC_PI_2)
        .map(|&(f, _)| f);
    let right = data[best..]
        .iter()
        .find(|&&(_, th)| sign * (theta_r - th) >= FRAC_PI_2)
        .map(|&(f, _)| f);
    let q_l = match (left, right) {
        (Some(l), Some(r)) if r > l => f_r / (r - l),
        _ => (best_slope.abs() * f_r / 4.0).max(1.0),
    };
    (f_r, q_l, theta_r)
}

/// Least-squares fit of the centred-circle phase response.
///
/// `data` holds (frequency, unwrapped phase) pairs in increasing frequency.
pub fn phase_fit(data: &[(f64, f64)], cfg: &FitConfig) -> Result<PhaseFit, FitError> {
    if data.len() < 4 {
        return Err(FitError::InsufficientData(format!(
            "{} phase points, at least 4 required",
            data.len()
        )));
    }
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, th)| (lo.min(th), hi.max(th)));
    let winding = hi - lo;
    if !(winding >= FRAC_PI_2) {
        return Err(FitError::NoResonance { winding });
    }
    let (f_r, q_l, theta0) = initial_guess(data);
    let sol = lm_minimize(
        &PhaseProblem { data },
        DVector::from_vec(vec![f_r, q_l, theta0]),
        cfg,
    )?;
    let p = &sol.params;
    let (mut q_l, mut theta0) = (p[1], p[2]);
    if q_l < 0.0 {
        // reversed winding: mirror to the positive-Q branch
        q_l = -q_l;
        theta0 += PI;
    }
    Ok(PhaseFit {
        f_r: p[0],
        q_l,
        theta0,
    })
}
