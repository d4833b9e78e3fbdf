use num_complex::Complex64;
use super::FitError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

/// Taubin algebraic circle fit.
///
/// Points are centred and scaled to unit RMS spread before the moments are
/// formed; the Taubin characteristic polynomial is then solved by Newton's
/// method from the left (Chernov's formulation), which converges to the
/// smallest root.
pub fn circle_fit(points: &[Complex64]) -> Result<Circle, FitError> {
    if points.len() < 3 {
        return Err(FitError::DegenerateGeometry);
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<Complex64>() / n;
    let spread = (points.iter().map(|p| (p - mean).norm_sqr()).sum::<f64>() / n).sqrt();
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(FitError::DegenerateGeometry);
    }

    let (mut mxx, mut myy, mut mxy, mut mxz, mut myz, mut mzz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let q = (p - mean) / spread;
        let (x, y) = (q.re, q.im);
        let z = x * x + y * y;
        mxx += x * x;
        myy += y * y;
        mxy += x * y;
        mxz += x * z;
        myz += y * z;
        mzz += z * z;
    }
    mxx /= n;
    myy /= n;
    mxy /= n;
    mxz /= n;
    myz /= n;
    mzz /= n;

    // collinear points: the scatter matrix is rank one
    let cov_xy = mxx * myy - mxy * mxy;
    if cov_xy <= 1e-14 * (mxx + myy).powi(2) {
        return Err(FitError::DegenerateGeometry);
    }

    let mz = mxx + myy;
    let var_z = mzz - mz * mz;
    let a3 = 4.0 * mz;
    let a2 = -3.0 * mz * mz - mzz;
    let a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
    let a0 = mxz * (mxz * myy - myz * mxy) + myz * (myz * mxx - mxz * mxy) - var_z * cov_xy;
    let (a22, a33) = (a2 + a2, a3 + a3 + a3);

    let mut x = 0.0f64;
    let mut y = a0;
    for _ in 0..100 {
        let dy = a1 + x * (a22 + a33 * x);
        let x_new = x - y / dy;
        if x_new == x || !x_new.is_finite() {
            break;
        }
        let y_new = a0 + x_new * (a1 + x_new * (a2 + x_new * a3));
        if y_new.abs() >= y.abs() {
            break;
        }
        x = x_new;
        y = y_new;
    }

    let det = x * x - x * mz + cov_xy;
    if det.abs() < 1e-300 || !det.is_finite() {
        return Err(FitError::DegenerateGeometry);
    }
    let cx = (mxz * (myy - x) - myz * mxy) / det / 2.0;
    let cy = (myz * (mxx - x) - mxz * mxy) / det / 2.0;
    let radius = (cx * cx + cy * cy + mz).sqrt() * spread;
    let center = mean + Complex64::new(cx, cy) * spread;
    if !radius.is_finite() || !center.is_finite() {
        return Err(FitError::DegenerateGeometry);
    }
    Ok(Circle { center, radius })
}
