use core::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

/// Least-squares fit of `C(x) = A (1 + V cos(2x − φ)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveFit {
    pub amplitude: f64,
    pub visibility: f64,
    /// Radians in `[0, 2π)`; the curve peaks at `x = φ / 2 (mod π)`.
    pub phase: f64,
    pub residual_rms: f64,
}

const MAX_FIT_VISIBILITY: f64 = 1.05;
const MIN_POINTS: usize = 8;

impl CurveFit {
    /// Setting (in the fit's x units) where the curve peaks, in `[0, π)`.
    pub fn peak_position(&self) -> f64 {
        0.5 * self.phase
    }

    pub fn model(&self, x: f64) -> f64 {
        0.5 * self.amplitude * (1.0 + self.visibility * libm::cos(2.0 * x - self.phase))
    }
}

/// Fits a correlation curve by linear least squares in `(A, A p, A q)` on
/// the basis `{1, cos 2x, sin 2x}`.
pub fn fit_correlation_curve(points: &[(f64, f64)]) -> Result<CurveFit> {
    if points.len() < MIN_POINTS {
        return Err(Error::Domain("curve fit needs at least 8 points"));
    }
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for &(x, c) in points {
        let (s, co) = libm::sincos(2.0 * x);
        let row = Vector3::new(1.0, co, s);
        normal += row * row.transpose();
        rhs += row * c;
    }
    let n = points.len() as f64;
    if (normal / n).determinant() < 1e-12 {
        return Err(Error::DegenerateFit);
    }
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    if hi - lo < FRAC_PI_2 * (1.0 - 1e-9) {
        return Err(Error::Domain("curve fit points must span at least half a period"));
    }
    let coef = normal.cholesky().ok_or(Error::DegenerateFit)?.solve(&rhs);
    let amplitude = 2.0 * coef[0];
    let fit = if amplitude <= 0.0 {
        CurveFit { amplitude: amplitude.max(0.0), visibility: 0.0, phase: 0.0, residual_rms: 0.0 }
    } else {
        let p = coef[1] / coef[0];
        let q = coef[2] / coef[0];
        CurveFit {
            amplitude,
            visibility: libm::hypot(p, q).min(MAX_FIT_VISIBILITY),
            phase: crate::math::rem_euclid(libm::atan2(q, p), TAU),
            residual_rms: 0.0,
        }
    };
    let ss: f64 = points
        .iter()
        .map(|&(x, c)| {
            let r = c - fit.model(x);
            r * r
        })
        .sum();
    Ok(CurveFit { residual_rms: libm::sqrt(ss / n), ..fit })
}
