use std::f64::consts::PI;

use num_complex::Complex64;

use super::phase::unwrap;
use super::{FitConfig, FitError};
use crate::model::{wrap_phase, BackgroundModel, FrequencyTrace};

const MIN_WING_POINTS: usize = 4;

/// Estimates a·e^{iα}·e^{−2πifτ} from the sweep wings of a trace.
///
/// See [`estimate_background_points`].
pub fn estimate_background(trace: &FrequencyTrace, cfg: &FitConfig) -> Result<BackgroundModel, FitError> {
    estimate_background_points(trace.frequencies(), trace.transmission(), cfg)
}

/// Background estimate from raw sweep points.
///
/// τ comes from a pooled least-squares slope of the unwrapped phase over the
/// two wings (each wing keeps its own intercept, so a 2π winding through an
/// over-coupled resonance does not bias it). α is the mean of the two wing
/// intercepts and a the median wing magnitude.
pub fn estimate_background_points(
    frequencies: &[f64],
    transmission: &[Complex64],
    cfg: &FitConfig,
) -> Result<BackgroundModel, FitError> {
    cfg.validate()?;
    let n = frequencies.len().min(transmission.len());
    let per_side = (cfg.wing_fraction * n as f64).floor() as usize;
    if per_side < MIN_WING_POINTS {
        return Err(FitError::InsufficientWings {
            per_side,
            required: MIN_WING_POINTS,
        });
    }
    let f0 = frequencies[n / 2];
    let phase = unwrap(transmission[..n].iter().map(|z| z.arg()));
    let wings = [0..per_side, n - per_side..n];

    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut means = [(0.0, 0.0); 2];
    for (w, range) in wings.iter().enumerate() {
        let m = range.len() as f64;
        let fm = range.clone().map(|i| frequencies[i] - f0).sum::<f64>() / m;
        let pm = range.clone().map(|i| phase[i]).sum::<f64>() / m;
        for i in range.clone() {
            let df = frequencies[i] - f0 - fm;
            sxy += df * (phase[i] - pm);
            sxx += df * df;
        }
        means[w] = (fm, pm);
    }
    let slope = sxy / sxx;
    let tau = -slope / (2.0 * PI);

    // α − 2πfτ = θ  ⇒  α = θ + 2πfτ, evaluated at each wing centroid
    let intercept = |(fm, pm): (f64, f64)| pm + 2.0 * PI * (fm + f0) * tau;
    let left = intercept(means[0]);
    let right = intercept(means[1]);
    let diff = wrap_phase(right - left);
    let alpha = left + 0.5 * diff;

    let mut mags: Vec<f64> = wings
        .iter()
        .flat_map(|r| r.clone().map(|i| transmission[i].norm()))
        .collect();
    mags.sort_by(f64::total_cmp);
    let mid = mags.len() / 2;
    let amplitude = if mags.len() % 2 == 0 {
        0.5 * (mags[mid - 1] + mags[mid])
    } else {
        mags[mid]
    };
    if !(amplitude > 0.0) {
        return Err(FitError::NoResonance { winding: 0.0 });
    }
    Ok(BackgroundModel::new(amplitude, alpha, tau)?)
}
