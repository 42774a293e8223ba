//! Vacuum free-space optical link between two drifting spacecraft.
//!
//! A Gaussian beam of waist `w0` diverges over the separation `L`; a circular
//! receive aperture of radius `a` collects part of it. Pointing error is a
//! static zero-mean Gaussian offset per axis with angular rms `σp`, so the
//! beam centroid lands `σp · L` off axis on average per axis.

use core::f64::consts::PI;

use crate::math::{bessel_i0e, gauss_hermite, gauss_legendre};
use crate::{Error, Result};

/// Transmit/receive optics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct OpticsConfig {
    /// Transmit beam waist radius, m.
    pub waist: f64,
    /// m.
    pub wavelength: f64,
    /// Receive aperture radius, m.
    pub rx_aperture_radius: f64,
    /// Per-axis rms pointing error, rad.
    pub pointing_sigma: f64,
    /// Fixed optics and filter loss, dB.
    pub excess_loss_db: f64,
}

impl Default for OpticsConfig {
    /// Roughly 30 dB at 100 km.
    fn default() -> Self {
        OpticsConfig {
            waist: 0.01,
            wavelength: 760e-9,
            rx_aperture_radius: 0.045,
            pointing_sigma: 5e-6,
            excess_loss_db: 0.0,
        }
    }
}

impl OpticsConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, value) in
            [("waist", self.waist), ("wavelength", self.wavelength), ("rx_aperture_radius", self.rx_aperture_radius)]
        {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(field, "must be positive"));
            }
        }
        if !(self.pointing_sigma >= 0.0 && self.pointing_sigma.is_finite()) {
            return Err(Error::invalid("pointing_sigma", "must be non-negative"));
        }
        if !(self.excess_loss_db >= 0.0 && self.excess_loss_db.is_finite()) {
            return Err(Error::invalid("excess_loss_db", "must be non-negative"));
        }
        Ok(())
    }

    /// Rayleigh range `π w0² / λ`.
    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }
}

/// Linear drift apart.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct GeometryState {
    /// m.
    pub initial_separation: f64,
    /// m/s.
    pub relative_velocity: f64,
}

impl Default for GeometryState {
    fn default() -> Self {
        GeometryState { initial_separation: 100.0, relative_velocity: 0.1 }
    }
}

impl GeometryState {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_separation >= 0.0 && self.initial_separation.is_finite()) {
            return Err(Error::invalid("initial_separation", "must be non-negative"));
        }
        if !(self.relative_velocity >= 0.0 && self.relative_velocity.is_finite()) {
            return Err(Error::invalid("relative_velocity", "must be non-negative"));
        }
        Ok(())
    }
}

/// Sinusoidal payload temperature over an orbit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct ThermalProfile {
    pub temp_min: f64,
    pub temp_max: f64,
    /// s.
    pub period: f64,
    /// rad.
    pub phase: f64,
}

impl Default for ThermalProfile {
    fn default() -> Self {
        ThermalProfile { temp_min: 10.0, temp_max: 30.0, period: 5700.0, phase: 0.0 }
    }
}

impl ThermalProfile {
    pub fn constant(temp: f64) -> Self {
        ThermalProfile { temp_min: temp, temp_max: temp, ..ThermalProfile::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.temp_min.is_finite() {
            return Err(Error::invalid("temp_min", "must be finite"));
        }
        if !(self.temp_max.is_finite() && self.temp_min <= self.temp_max) {
            return Err(Error::invalid("temp_max", "must be finite and at least temp_min"));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::invalid("period", "must be positive"));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        Ok(())
    }
}

pub fn separation_at(geometry: &GeometryState, t: f64) -> f64 {
    geometry.initial_separation + geometry.relative_velocity * t
}

/// `w(L) = w0 · sqrt(1 + (λL / (π w0²))²)`.
pub fn beam_radius(range: f64, optics: &OpticsConfig) -> f64 {
    let z = range / optics.rayleigh_range();
    optics.waist * libm::sqrt(1.0 + z * z)
}

/// Fraction of power collected with the beam centred on the aperture:
/// `1 − exp(−2a²/w²)`.
pub fn centered_transmittance(range: f64, optics: &OpticsConfig) -> f64 {
    let w = beam_radius(range, optics);
    let a = optics.rx_aperture_radius;
    -libm::expm1(-2.0 * a * a / (w * w))
}

/// Fraction collected with the beam centroid displaced by `offset` from the
/// aperture centre.
///
/// `T(d) = ∫₀ᵃ (4r/w²) exp(−2(r−d)²/w²) I0e(4rd/w²) dr`, by 64-point
/// Gauss–Legendre on `[0, a]`.
pub fn offset_transmittance(offset: f64, beam: f64, aperture: f64) -> f64 {
    let q = gauss_legendre(64, 0.0, aperture);
    offset_transmittance_with(&q, offset, beam)
}

fn offset_transmittance_with(q: &crate::math::Quadrature, offset: f64, beam: f64) -> f64 {
    let w2 = beam * beam;
    q.nodes
        .iter()
        .zip(&q.weights)
        .map(|(&r, &wt)| {
            let d = r - offset;
            wt * (4.0 * r / w2) * libm::exp(-2.0 * d * d / w2) * bessel_i0e(4.0 * r * offset / w2)
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Expected collected fraction over Gaussian pointing jitter.
///
/// For `a ≤ w/3` this uses the closed form `1 − exp(−2a²/(w² + 4σr²))`: the
/// jittered beam, averaged over offsets, is again Gaussian with per-axis
/// variance `w²/4 + σr²`. To first order in `a²/w²` it equals
/// `T0 / (1 + 4σr²/w²)`. Larger apertures use a 64×64 Gauss–Hermite product
/// rule over [`offset_transmittance`].
pub fn jitter_averaged_transmittance(range: f64, optics: &OpticsConfig) -> f64 {
    let t0 = centered_transmittance(range, optics);
    let sigma_r = optics.pointing_sigma * range;
    if sigma_r == 0.0 {
        return t0;
    }
    let w = beam_radius(range, optics);
    let a = optics.rx_aperture_radius;
    let t = if a <= w / 3.0 {
        -libm::expm1(-2.0 * a * a / (w * w + 4.0 * sigma_r * sigma_r))
    } else {
        jitter_quadrature(sigma_r, w, a)
    };
    t.min(t0)
}

/// 2-D Gauss–Hermite average of the offset transmittance. Exploits the
/// radial symmetry of the integrand by summing one quadrant.
fn jitter_quadrature(sigma_r: f64, w: f64, a: f64) -> f64 {
    let gh = gauss_hermite(64);
    let gl = gauss_legendre(64, 0.0, a);
    let scale = core::f64::consts::SQRT_2 * sigma_r;
    // Nodes come in ± pairs; the positive half lives at the front.
    let half = gh.nodes.len() / 2;
    let mut acc = 0.0;
    for i in 0..half {
        let x = scale * gh.nodes[i];
        for j in 0..half {
            let y = scale * gh.nodes[j];
            let d = libm::hypot(x, y);
            acc += gh.weights[i] * gh.weights[j] * offset_transmittance_with(&gl, d, w);
        }
    }
    4.0 * acc / PI
}

/// Total link loss in dB. Returns `f64::INFINITY` when the collected fraction
/// underflows to zero.
pub fn total_link_db(range: f64, optics: &OpticsConfig) -> f64 {
    let t = jitter_averaged_transmittance(range, optics);
    if t <= 0.0 {
        return f64::INFINITY;
    }
    -10.0 * libm::log10(t) + optics.excess_loss_db
}

/// `10^(−dB/10)`.
pub fn db_to_transmittance(db: f64) -> Result<f64> {
    if !(db >= 0.0) {
        return Err(Error::Domain("loss in dB must be non-negative"));
    }
    Ok(libm::pow(10.0, -db / 10.0))
}

/// Payload temperature at time `t`, always within `[temp_min, temp_max]`.
pub fn temperature_at(profile: &ThermalProfile, t: f64) -> f64 {
    let mid = 0.5 * (profile.temp_min + profile.temp_max);
    let half = 0.5 * (profile.temp_max - profile.temp_min);
    let temp = mid + half * libm::sin(2.0 * PI * t / profile.period + profile.phase);
    temp.clamp(profile.temp_min, profile.temp_max)
}
