//! Levenberg–Marquardt nonlinear least squares.
//!
//! Minimises ½‖r(x)‖² with Marquardt's diagonal damping. The normal matrix is
//! solved in column-scaled form so that parameters spanning many orders of
//! magnitude (a resonance frequency in Hz next to a cable delay in s) stay
//! well conditioned.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{FitConfig, FitError, Partial};

/// A residual vector with an optional analytic Jacobian.
pub trait LeastSquares {
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64>;

    /// Jacobian ∂r/∂x, one row per residual. Defaults to central differences.
    fn jacobian(&self, params: &DVector<f64>) -> DMatrix<f64> {
        numerical_jacobian(|p| self.residuals(p), params)
    }
}

/// Adapts a residual closure to [`LeastSquares`] with a numerical Jacobian.
pub struct FnProblem<F>(pub F);

impl<F> LeastSquares for FnProblem<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64> {
        (self.0)(params)
    }
}

/// Central differences, step 10⁻⁶·|x_k| with an absolute floor of 10⁻¹².
pub fn numerical_jacobian<F>(f: F, x: &DVector<f64>) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let m = f(x).len();
    let mut jac = DMatrix::zeros(m, x.len());
    let mut xp = x.clone();
    for k in 0..x.len() {
        let h = (1e-6 * x[k].abs()).max(1e-12);
        xp[k] = x[k] + h;
        let plus = f(&xp);
        xp[k] = x[k] - h;
        let minus = f(&xp);
        xp[k] = x[k];
        jac.set_column(k, &((plus - minus) / (2.0 * h)));
    }
    jac
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Residual vector orthogonal to every Jacobian column within tolerance.
    Gradient,
    /// Scaled step below tolerance.
    Step,
    /// Actual and predicted cost reductions below tolerance.
    Function,
    /// Residuals vanish.
    ExactFit,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmDiagnostics {
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// max_k |J_kᵀ r| / (‖J_k‖ ‖r‖) at the solution.
    pub gradient_measure: f64,
    pub final_damping: f64,
    /// Normal matrix was singular; covariance is a pseudo-inverse.
    pub singular: bool,
}

impl LmDiagnostics {
    pub fn converged(&self) -> bool {
        self.termination != Termination::MaxIterations
    }
}

#[derive(Debug, Clone)]
pub struct LmSolution {
    pub params: DVector<f64>,
    pub residuals: DVector<f64>,
    /// (JᵀJ)⁻¹ scaled by the residual variance.
    pub covariance: DMatrix<f64>,
    /// (JᵀJ)⁻¹ without the variance factor.
    pub unscaled_covariance: DMatrix<f64>,
    /// ‖r‖² / (m − n); zero for an exact fit.
    pub residual_variance: f64,
    pub diagnostics: LmDiagnostics,
}

impl LmSolution {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.norm()
    }
}

/// Solves (A + λ D²) δ = −g in the column-scaled basis, D = `scale`.
fn damped_step(a: &DMatrix<f64>, g: &DVector<f64>, scale: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let n = g.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = a[(i, j)] / (scale[i] * scale[j]);
        }
        m[(i, i)] += lambda;
    }
    let rhs = DVector::from_fn(n, |i, _| -g[i] / scale[i]);
    let y = m.cholesky()?.solve(&rhs);
    let step = DVector::from_fn(n, |i, _| y[i] / scale[i]);
    step.iter().all(|v| v.is_finite()).then_some(step)
}

/// Inverse of the normal matrix, falling back to a pseudo-inverse. Returns the
/// inverse and whether the fallback was needed.
fn normal_inverse(a: &DMatrix<f64>, scale: &DVector<f64>) -> (DMatrix<f64>, bool) {
    let n = a.nrows();
    let scaled = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (scale[i] * scale[j]));
    let unscale = |inv: DMatrix<f64>| DMatrix::from_fn(n, n, |i, j| inv[(i, j)] / (scale[i] * scale[j]));
    if let Some(ch) = scaled.clone().cholesky() {
        let inv = ch.inverse();
        if inv.iter().all(|v| v.is_finite()) {
            let mut inv = unscale(inv);
            symmetrize(&mut inv);
            return (inv, false);
        }
    }
    let pinv = scaled
        .pseudo_inverse(1e-12)
        .unwrap_or_else(|_| DMatrix::zeros(n, n));
    let mut pinv = unscale(pinv);
    symmetrize(&mut pinv);
    (pinv, true)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m = (&*m + t) * 0.5;
}

/// Per-column scale √(JᵀJ)_kk, floored so that dead columns stay invertible.
fn column_scale(a: &DMatrix<f64>, running: &mut DVector<f64>) -> DVector<f64> {
    for k in 0..running.len() {
        running[k] = running[k].max(a[(k, k)].sqrt());
    }
    let top = running.max();
    running.map(|s| if s > 0.0 { s } else if top > 0.0 { top * 1e-30 } else { 1.0 })
}

fn gradient_measure(jac: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rn = r.norm();
    if rn == 0.0 {
        return 0.0;
    }
    jac.column_iter()
        .map(|c| {
            let cn = c.norm();
            if cn == 0.0 {
                0.0
            } else {
                (c.dot(r) / (cn * rn)).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Levenberg–Marquardt minimisation of ½‖r(x)‖².
///
/// Deterministic for identical inputs. When the iteration budget runs out the
/// best point found is returned inside [`FitError::NotConverged`].
pub fn lm_minimize<P: LeastSquares + ?Sized>(
    problem: &P,
    initial: DVector<f64>,
    cfg: &FitConfig,
) -> Result<LmSolution, FitError> {
    let n = initial.len();
    let mut x = initial;
    let mut r = problem.residuals(&x);
    if !r.iter().all(|v| v.is_finite()) || !x.iter().all(|v| v.is_finite()) {
        return Err(FitError::NonFiniteResidual);
    }
    let m = r.len();
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = 1e-3;
    let mut nu = 2.0;
    let mut evaluations = 1;
    let mut running = DVector::zeros(n);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        if cost == 0.0 {
            termination = Termination::ExactFit;
            break;
        }
        let jac = problem.jacobian(&x);
        let a = jac.tr_mul(&jac);
        let g = jac.tr_mul(&r);
        if gradient_measure(&jac, &r) <= cfg.gradient_tolerance {
            termination = Termination::Gradient;
            break;
        }
        let scale = column_scale(&a, &mut running);
        let scaled_x = x.component_mul(&scale).norm();

        let mut accepted = false;
        let mut done = None;
        while !accepted {
            let step = match damped_step(&a, &g, &scale, lambda) {
                Some(s) => s,
                None => {
                    lambda *= nu;
                    nu *= 2.0;
                    if lambda > 1e30 {
                        done = Some(Termination::Step);
                        break;
                    }
                    continue;
                }
            };
            let scaled_step = step.component_mul(&scale).norm();
            let step_small = scaled_step <= cfg.step_tolerance * (scaled_x + cfg.step_tolerance);

            let x_new = &x + &step;
            let r_new = problem.residuals(&x_new);
            evaluations += 1;
            let cost_new = 0.5 * r_new.norm_squared();
            // L(0) − L(δ) = ½ δᵀ(λ D δ − g)
            let damp = DVector::from_fn(n, |i, _| lambda * scale[i] * scale[i] * step[i]);
            let predicted = 0.5 * step.dot(&(damp - &g));

            if cost_new.is_finite() && cost_new < cost {
                let rho = (cost - cost_new) / predicted;
                let actual_rel = (cost - cost_new) / cost;
                let predicted_rel = predicted / cost;
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
                nu = 2.0;
                accepted = true;
                if step_small {
                    done = Some(Termination::Step);
                } else if actual_rel <= cfg.function_tolerance
                    && predicted_rel <= cfg.function_tolerance
                    && rho <= 2.0
                {
                    done = Some(Termination::Function);
                }
            } else {
                if step_small {
                    done = Some(Termination::Step);
                    break;
                }
                lambda *= nu;
                nu *= 2.0;
            }
        }
        if let Some(t) = done {
            termination = t;
            break;
        }
    }
    if termination == Termination::MaxIterations && cost == 0.0 {
        termination = Termination::ExactFit;
    }

    let jac = problem.jacobian(&x);
    let a = jac.tr_mul(&jac);
    let grad = gradient_measure(&jac, &r);
    let scale = column_scale(&a, &mut DVector::zeros(n));
    let (unscaled, singular) = normal_inverse(&a, &scale);
    let dof = m.saturating_sub(n);
    let residual_variance = if dof > 0 { r.norm_squared() / dof as f64 } else { 0.0 };
    let solution = LmSolution {
        params: x,
        residuals: r,
        covariance: &unscaled * residual_variance,
        unscaled_covariance: unscaled,
        residual_variance,
        diagnostics: LmDiagnostics {
            iterations,
            evaluations,
            termination,
            gradient_measure: grad,
            final_damping: lambda,
            singular,
        },
    };
    if solution.diagnostics.converged() {
        Ok(solution)
    } else {
        Err(FitError::NotConverged {
            iterations,
            partial: Partial::Lm(Box::new(solution)),
        })
    }
}
