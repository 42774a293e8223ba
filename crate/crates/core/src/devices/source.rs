use crate::{Error, Result};

/// Photon-pair source with a linear brightness–temperature coupling.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct SourceModel {
    /// Pairs per second at `temp_ref`.
    pub brightness_ref: f64,
    /// °C.
    pub temp_ref: f64,
    /// Fractional brightness change per °C of cooling.
    pub brightness_slope: f64,
    pub visibility: f64,
    /// Meters.
    pub wavelength_local: f64,
    /// Meters.
    pub wavelength_remote: f64,
}

impl Default for SourceModel {
    fn default() -> Self {
        SourceModel {
            brightness_ref: 1.0e6,
            temp_ref: 20.0,
            brightness_slope: 0.01,
            visibility: 0.97,
            wavelength_local: 867e-9,
            wavelength_remote: 760e-9,
        }
    }
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.brightness_ref > 0.0 && self.brightness_ref.is_finite()) {
            return Err(Error::invalid("brightness_ref", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::invalid("visibility", "must lie in [0, 1]"));
        }
        if !self.temp_ref.is_finite() {
            return Err(Error::invalid("temp_ref", "must be finite"));
        }
        if !self.brightness_slope.is_finite() {
            return Err(Error::invalid("brightness_slope", "must be finite"));
        }
        if !(self.wavelength_local > 0.0 && self.wavelength_local.is_finite()) {
            return Err(Error::invalid("wavelength_local", "must be positive"));
        }
        if !(self.wavelength_remote > 0.0 && self.wavelength_remote.is_finite()) {
            return Err(Error::invalid("wavelength_remote", "must be positive"));
        }
        Ok(())
    }
}

/// Pair rate at `temp`: `max(0, B_ref · (1 + κ · (T_ref − T)))`.
pub fn source_brightness(model: &SourceModel, temp: f64) -> f64 {
    (model.brightness_ref * (1.0 + model.brightness_slope * (model.temp_ref - temp))).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(slope: f64, temp_ref: f64) -> SourceModel {
        SourceModel { brightness_slope: slope, temp_ref, ..SourceModel::default() }
    }

    #[test]
    fn reference_point_and_flat_limit() {
        let m = model(0.01, 20.0);
        assert_eq!(source_brightness(&m, 20.0), 1.0e6);
        let flat = model(0.0, 20.0);
        for t in [-40.0, 10.0, 30.0, 85.0] {
            assert_eq!(source_brightness(&flat, t), 1.0e6);
        }
    }

    #[test]
    fn colder_is_brighter() {
        let m = model(0.01, 24.7);
        let b = source_brightness(&m, 15.0);
        assert!((b - 1.097e6).abs() < 1e-6);
        assert!(source_brightness(&m, 15.0) > source_brightness(&m, 24.7));
    }

    #[test]
    fn clamps_at_zero() {
        let m = model(0.01, 20.0);
        assert_eq!(source_brightness(&m, 200.0), 0.0);
    }

    #[test]
    fn validation() {
        assert!(SourceModel::default().validate().is_ok());
        assert!(SourceModel { visibility: 1.5, ..SourceModel::default() }.validate().is_err());
        assert!(SourceModel { brightness_ref: 0.0, ..SourceModel::default() }.validate().is_err());
    }
}
