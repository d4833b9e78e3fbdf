use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::phase::unwrap;
use super::{
    circle_fit, derive_seed, estimate_background, lm_minimize, phase_fit, FitConfig, FitError,
    LeastSquares, LmDiagnostics, LmSolution, Partial,
};
use crate::model::{
    internal_loss, s21_forward, s21_jacobian, wrap_phase, BackgroundModel, FrequencyTrace,
    InternalLoss, ResonanceParams, TraceMetadata,
};

/// Outcome of a single-resonance fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ResonanceParams,
    pub background: BackgroundModel,
    /// 7×7 covariance in [`crate::model::RESONANCE_PARAM_NAMES`] order.
    pub covariance: DMatrix<f64>,
    /// Euclidean norm of the stacked real/imaginary residuals.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `None` only on a flagged partial result whose δ_i came out non-positive.
    pub loss: Option<InternalLoss>,
    pub diagnostics: LmDiagnostics,
    pub metadata: TraceMetadata,
}

impl FitResult {
    pub fn label(&self) -> &str {
        &self.metadata.label
    }

    pub fn q_i(&self) -> Option<f64> {
        self.loss.map(|l| l.q_i)
    }
}

struct S21Problem<'a> {
    trace: &'a FrequencyTrace,
}

fn unpack(p: &DVector<f64>) -> (ResonanceParams, BackgroundModel) {
    (
        ResonanceParams {
            f_r: p[0],
            q_l: p[1],
            qc_mag: p[2],
            phi: p[3],
        },
        BackgroundModel {
            amplitude: p[4],
            phase_offset: p[5],
            cable_delay: p[6],
        },
    )
}

impl LeastSquares for S21Problem<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let (res, bg) = unpack(p);
        let n = self.trace.len();
        let mut r = DVector::zeros(2 * n);
        for (i, (f, z)) in self.trace.points().enumerate() {
            let d = s21_forward(f, &res, &bg) - z;
            r[i] = d.re;
            r[n + i] = d.im;
        }
        r
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let (res, bg) = unpack(p);
        let n = self.trace.len();
        let mut j = DMatrix::zeros(2 * n, 7);
        for (i, &f) in self.trace.frequencies().iter().enumerate() {
            for (k, d) in s21_jacobian(f, &res, &bg).iter().enumerate() {
                j[(i, k)] = d.re;
                j[(n + i, k)] = d.im;
            }
        }
        j
    }
}

/// Geometric starting point: background from the wings, circle and phase fit of
/// the normalised trace, then the off-resonant point on the fitted circle
/// corrects the background amplitude and phase.
fn initial_point(trace: &FrequencyTrace, cfg: &FitConfig) -> Result<DVector<f64>, FitError> {
    let bg = estimate_background(trace, cfg)?;
    let normalized: Vec<Complex64> = trace.points().map(|(f, z)| z / bg.at(f)).collect();
    let circle = circle_fit(&normalized).map_err(|e| match e {
        FitError::DegenerateGeometry => FitError::NoResonance { winding: 0.0 },
        other => other,
    })?;
    let phases = unwrap(normalized.iter().map(|z| (z - circle.center).arg()));
    let data: Vec<(f64, f64)> = trace.frequencies().iter().copied().zip(phases).collect();
    let phase = phase_fit(&data, cfg)?;

    // far off resonance the centred phase tends to θ₀ − π
    let off = circle.center + Complex64::from_polar(circle.radius, phase.theta0 - PI);
    if !(off.norm() > 0.0) {
        return Err(FitError::NoResonance { winding: 0.0 });
    }
    let center = circle.center / off;
    let diameter = 2.0 * circle.radius / off.norm();
    let phi = (1.0 - center).arg();
    if phi.abs() >= FRAC_PI_2 {
        return Err(FitError::NonPhysicalFit(format!(
            "asymmetry angle {phi:.4} rad outside (-pi/2, pi/2)"
        )));
    }
    Ok(DVector::from_vec(vec![
        phase.f_r,
        phase.q_l,
        phase.q_l / diameter,
        phi,
        bg.amplitude * off.norm(),
        bg.phase_offset + off.arg(),
        bg.cable_delay,
    ]))
}

/// Folds sign ambiguities back into the canonical parameter ranges and returns
/// the matching per-parameter sign flips for the covariance.
fn canonicalize(p: &mut DVector<f64>) -> [f64; 7] {
    let mut signs = [1.0; 7];
    if p[4] < 0.0 {
        p[4] = -p[4];
        p[5] += PI;
        signs[4] = -1.0;
    }
    if p[2] < 0.0 {
        p[2] = -p[2];
        p[3] += PI;
        signs[2] = -1.0;
    }
    p[3] = wrap_phase(p[3]);
    p[5] = wrap_phase(p[5]);
    signs
}

fn build_result(trace: &FrequencyTrace, mut sol: LmSolution) -> FitResult {
    let signs = canonicalize(&mut sol.params);
    let cov = DMatrix::from_fn(7, 7, |i, j| sol.covariance[(i, j)] * signs[i] * signs[j]);
    let (params, background) = unpack(&sol.params);
    FitResult {
        params,
        background,
        covariance: cov,
        residual_norm: sol.residuals.norm(),
        converged: sol.diagnostics.converged(),
        iterations: sol.diagnostics.iterations,
        loss: internal_loss(&params).ok(),
        diagnostics: sol.diagnostics,
        metadata: trace.metadata.clone(),
    }
}

fn jitter(x0: &DVector<f64>, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let mut x = x0.clone();
    x[0] += 0.1 * g() * x0[0] / x0[1].abs();
    x[1] *= (0.1 * g()).exp();
    x[2] *= (0.1 * g()).exp();
    x[3] = (x[3] + 0.05 * g()).clamp(-1.4, 1.4);
    x
}

/// Fits the notch lineshape to a trace.
///
/// Runs the staged geometric initialisation and then a joint
/// Levenberg–Marquardt refinement of (f_r, Q_l, |Q_c|, φ, a, α, τ). If the
/// refinement fails, up to `cfg.restarts` jittered restarts are tried with a
/// seed derived from `cfg.seed` and the trace label. A fit that never
/// converges is returned inside [`FitError::NotConverged`].
pub fn fit_resonance(trace: &FrequencyTrace, cfg: &FitConfig) -> Result<FitResult, FitError> {
    cfg.validate()?;
    let x0 = initial_point(trace, cfg)?;
    let problem = S21Problem { trace };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &trace.metadata.label));
    let mut best: Option<(usize, LmSolution)> = None;
    let mut start = x0.clone();

    for attempt in 0..=cfg.restarts {
        if attempt > 0 {
            start = jitter(&x0, &mut rng);
        }
        let (sol, iterations) = match lm_minimize(&problem, start.clone(), cfg) {
            Ok(sol) => {
                let it = sol.diagnostics.iterations;
                (sol, it)
            }
            Err(FitError::NotConverged {
                iterations,
                partial: Partial::Lm(sol),
            }) => (*sol, iterations),
            Err(e) => return Err(e),
        };
        if sol.diagnostics.converged() {
            let result = build_result(trace, sol);
            return finish(result);
        }
        let better = best
            .as_ref()
            .is_none_or(|(_, b)| sol.residuals.norm() < b.residuals.norm());
        if better {
            best = Some((iterations, sol));
        }
    }
    let (iterations, sol) = best.expect("at least one attempt");
    let result = build_result(trace, sol);
    Err(FitError::NotConverged {
        iterations,
        partial: Partial::Resonance(Box::new(result)),
    })
}

fn finish(result: FitResult) -> Result<FitResult, FitError> {
    if !(result.params.f_r > 0.0 && result.params.q_l > 0.0) {
        return Err(FitError::NonPhysicalFit(format!(
            "f_r = {:e}, Q_l = {:e} must be positive",
            result.params.f_r, result.params.q_l
        )));
    }
    if result.params.phi.abs() >= FRAC_PI_2 {
        return Err(FitError::NonPhysicalFit(format!(
            "asymmetry angle {:.4} rad outside (-pi/2, pi/2)",
            result.params.phi
        )));
    }
    if result.loss.is_none() {
        return Err(FitError::NonPhysicalFit(format!(
            "internal loss {:e} is not positive",
            1.0 / result.params.q_l - result.params.phi.cos() / result.params.qc_mag
        )));
    }
    Ok(result)
}
