//! Device physics: pair source, liquid-crystal rotators, Geiger-mode
//! detectors, photon streams, coincidence matching and correlation-curve
//! fitting.

mod coincidence;
mod detector;
mod fit;
mod lcpr;
mod source;
mod stream;

pub use coincidence::{accidental_rate, match_coincidences, within_window};
pub use detector::{correct_measured_rate, detector_efficiency, measured_rate_paralyzable, DetectorModel};
pub use fit::{fit_correlation_curve, CurveFit};
pub use lcpr::{drive_voltage, lcpr_rotation, LcprModel};
pub use source::{source_brightness, SourceModel};
pub use stream::{
    apply_dead_time, dark_counts, detect_stream, detect_stream_split, generate_pair_times, thin_survivors,
    ArmDetectors, DetectionEvent, Origin,
};
