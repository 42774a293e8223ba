use crate::{Error, Result};

/// Geiger-mode avalanche photodiode.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct DetectorModel {
    pub efficiency_ref: f64,
    /// Fractional efficiency loss per °C above `temp_ref`.
    pub temp_coeff: f64,
    pub temp_ref: f64,
    /// Counts per second.
    pub dark_rate: f64,
    /// Paralyzable dead time, seconds.
    pub dead_time: f64,
    /// Temperature-compensated bias: efficiency is held at `efficiency_ref`.
    pub compensated: bool,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel {
            efficiency_ref: 0.5,
            temp_coeff: 0.01,
            temp_ref: 20.0,
            dark_rate: 500.0,
            dead_time: 100e-9,
            compensated: true,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency_ref) {
            return Err(Error::invalid("efficiency_ref", "must lie in [0, 1]"));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::invalid("dark_rate", "must be non-negative"));
        }
        if !(self.dead_time > 0.0 && self.dead_time.is_finite()) {
            return Err(Error::invalid("dead_time", "must be positive"));
        }
        if !self.temp_coeff.is_finite() {
            return Err(Error::invalid("temp_coeff", "must be finite"));
        }
        if !self.temp_ref.is_finite() {
            return Err(Error::invalid("temp_ref", "must be finite"));
        }
        Ok(())
    }
}

pub fn detector_efficiency(model: &DetectorModel, temp: f64) -> f64 {
    if model.compensated {
        model.efficiency_ref
    } else {
        (model.efficiency_ref * (1.0 - model.temp_coeff * (temp - model.temp_ref))).clamp(0.0, 1.0)
    }
}

/// Paralyzable dead-time response `m = n · exp(−n τ)`.
pub fn measured_rate_paralyzable(true_rate: f64, dead_time: f64) -> f64 {
    true_rate * libm::exp(-true_rate * dead_time)
}

/// Inverts [`measured_rate_paralyzable`] on the rising branch `n τ ≤ 1`.
pub fn correct_measured_rate(measured: f64, dead_time: f64) -> Result<f64> {
    if !(dead_time > 0.0) {
        return Err(Error::Domain("dead time must be positive"));
    }
    if !(measured >= 0.0) {
        return Err(Error::Domain("measured rate must be non-negative"));
    }
    let max = libm::exp(-1.0) / dead_time;
    if measured > max * (1.0 + 1e-12) {
        return Err(Error::Saturated { measured, max });
    }
    if measured == 0.0 {
        return Ok(0.0);
    }
    // Work in x = n τ, y = m τ: solve x e^{-x} = y on [0, 1].
    let y = measured * dead_time;
    // The curve is flat at its peak, so rates within rounding of the maximum
    // cannot be told apart from it.
    if y >= libm::exp(-1.0) * (1.0 - 4.0 * f64::EPSILON) {
        return Ok(1.0 / dead_time);
    }
    let f = |x: f64| x * libm::exp(-x) - y;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    // x e^{-x} ≈ x for small y; a good start for Newton.
    let mut x = (y * (1.0 + y)).min(1.0);
    for _ in 0..200 {
        let fx = f(x);
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dfx = (1.0 - x) * libm::exp(-x);
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * next.max(1e-300) || hi - lo <= 1e-16 * hi {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x / dead_time)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn efficiency_examples() {
        let comp = DetectorModel::default();
        assert_eq!(detector_efficiency(&comp, -5.0), 0.5);
        let flat = DetectorModel { compensated: false, temp_coeff: 0.0, ..DetectorModel::default() };
        assert_eq!(detector_efficiency(&flat, 35.0), 0.5);
        let drift = DetectorModel { compensated: false, temp_coeff: 0.02, ..DetectorModel::default() };
        assert!((detector_efficiency(&drift, 30.0) - 0.4).abs() < 1e-15);
        assert_eq!(detector_efficiency(&drift, 100.0), 0.0);
        let hot = DetectorModel { compensated: false, efficiency_ref: 0.9, ..drift };
        assert_eq!(detector_efficiency(&hot, -100.0), 1.0);
    }

    #[test]
    fn paralyzable_examples() {
        let tau = 1e-6;
        assert_eq!(measured_rate_paralyzable(0.0, tau), 0.0);
        let peak = measured_rate_paralyzable(1.0 / tau, tau);
        assert!((peak - libm::exp(-1.0) / tau).abs() < 1e-9);
        let m = measured_rate_paralyzable(1e5, tau);
        assert!((m - 90_483.741_803_595_95).abs() < 1e-6);
    }

    #[test]
    fn correction_examples() {
        let tau = 1e-6;
        assert_eq!(correct_measured_rate(0.0, tau).unwrap(), 0.0);
        let n = correct_measured_rate(libm::exp(-1.0) / tau, tau).unwrap();
        assert_eq!(n, 1.0 / tau);
        let n = correct_measured_rate(90_483.741_803_595_95, tau).unwrap();
        assert!((n - 1e5).abs() < 1e-4);
    }

    #[test]
    fn correction_errors() {
        let tau = 1e-6;
        assert!(matches!(correct_measured_rate(4e5, tau), Err(Error::Saturated { .. })));
        assert!(matches!(correct_measured_rate(-1.0, tau), Err(Error::Domain(_))));
        assert!(matches!(correct_measured_rate(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn validation() {
        assert!(DetectorModel::default().validate().is_ok());
        assert!(DetectorModel { dead_time: 0.0, ..DetectorModel::default() }.validate().is_err());
        assert!(DetectorModel { efficiency_ref: 1.2, ..DetectorModel::default() }.validate().is_err());
    }
}
