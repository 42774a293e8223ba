use core::f64::consts::FRAC_PI_2;

use crate::math::{logistic, logit};
use crate::polarization::AnalyzerAngle;
use crate::{Error, Result};

/// Liquid-crystal polarization rotator driven by a voltage.
///
/// Rotation follows a logistic curve in voltage. Temperature acts as a pure
/// voltage offset: cooling below `temp_cal` (with `temp_coeff > 0`) means a
/// higher drive voltage is needed for the same rotation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct LcprModel {
    pub v_min: f64,
    pub v_max: f64,
    /// Voltage giving a 45° rotation at `temp_cal`.
    pub v_half: f64,
    /// Logistic steepness, 1/V.
    pub slope: f64,
    /// V/°C.
    pub temp_coeff: f64,
    pub temp_cal: f64,
}

impl Default for LcprModel {
    fn default() -> Self {
        LcprModel { v_min: 0.0, v_max: 10.0, v_half: 5.0, slope: 2.5, temp_coeff: 0.05, temp_cal: 20.0 }
    }
}

impl LcprModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_min.is_finite() && self.v_min < self.v_half) {
            return Err(Error::invalid("v_min", "must be finite and below v_half"));
        }
        if !(self.v_max.is_finite() && self.v_half < self.v_max) {
            return Err(Error::invalid("v_max", "must be finite and above v_half"));
        }
        if !(self.slope > 0.0 && self.slope.is_finite()) {
            return Err(Error::invalid("slope", "must be positive"));
        }
        if !self.temp_coeff.is_finite() {
            return Err(Error::invalid("temp_coeff", "must be finite"));
        }
        if !self.temp_cal.is_finite() {
            return Err(Error::invalid("temp_cal", "must be finite"));
        }
        Ok(())
    }

    fn effective_voltage(&self, voltage: f64, temp: f64) -> f64 {
        voltage - self.temp_coeff * (self.temp_cal - temp)
    }
}

/// Rotation realized at `voltage` and `temp`.
pub fn lcpr_rotation(model: &LcprModel, voltage: f64, temp: f64) -> Result<AnalyzerAngle> {
    if !(model.v_min..=model.v_max).contains(&voltage) {
        return Err(Error::Domain("lcpr voltage outside actuation range"));
    }
    let v_eff = model.effective_voltage(voltage, temp);
    let theta = FRAC_PI_2 * logistic(model.slope * (v_eff - model.v_half));
    AnalyzerAngle::new(theta.clamp(0.0, FRAC_PI_2))
}

/// Voltage that realizes `target` at `temp`, clamped to the actuation range.
///
/// Targets at or beyond the ends of `[0, π/2]` drive the rotator to the
/// corresponding rail.
pub fn drive_voltage(model: &LcprModel, target: AnalyzerAngle, temp: f64) -> f64 {
    let frac = target.radians() / FRAC_PI_2;
    let offset = model.temp_coeff * (model.temp_cal - temp);
    let v = if frac <= 0.0 {
        model.v_min
    } else if frac >= 1.0 {
        model.v_max
    } else {
        model.v_half + logit(frac) / model.slope + offset
    };
    v.clamp(model.v_min, model.v_max)
}
