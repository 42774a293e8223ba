use alloc::vec::Vec;

use rand::Rng;

use super::detector::{detector_efficiency, DetectorModel};
use crate::polarization::Port;
use crate::rng::exponential;

/// Where a detection came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Photon of the pair with this index in the emitted pair list.
    Pair(usize),
    Dark,
}

/// One detector click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    /// Seconds since run start.
    pub time: f64,
    pub port: Port,
    pub origin: Origin,
}

/// The two detectors behind one polarizing beam splitter, indexed by port.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct ArmDetectors {
    pub transmitted: DetectorModel,
    pub reflected: DetectorModel,
}

impl ArmDetectors {
    pub fn uniform(model: DetectorModel) -> Self {
        ArmDetectors { transmitted: model.clone(), reflected: model }
    }

    pub fn get(&self, port: Port) -> &DetectorModel {
        match port {
            Port::Transmitted => &self.transmitted,
            Port::Reflected => &self.reflected,
        }
    }
}

/// Emission times of a homogeneous Poisson process on `[0, duration)`.
pub fn generate_pair_times<R: Rng + ?Sized>(rate: f64, duration: f64, rng: &mut R) -> Vec<f64> {
    let mut times = Vec::new();
    if !(rate > 0.0) || !(duration > 0.0) {
        return times;
    }
    times.reserve((rate * duration * 1.01) as usize + 16);
    let mut t = exponential(rng, rate);
    while t < duration {
        times.push(t);
        t += exponential(rng, rate);
    }
    times
}

/// Indices of photons that survive independent Bernoulli(`p`) thinning, in
/// ascending order.
///
/// Uses geometric gap sampling, so the cost scales with the number of
/// survivors rather than the number of candidates.
pub fn thin_survivors<R: Rng + ?Sized>(candidates: usize, p: f64, rng: &mut R) -> Vec<usize> {
    if p <= 0.0 || candidates == 0 {
        return Vec::new();
    }
    if p >= 1.0 {
        return (0..candidates).collect();
    }
    let mut out = Vec::with_capacity((candidates as f64 * p * 1.1) as usize + 8);
    let log_q = libm::log1p(-p);
    let mut i = 0usize;
    loop {
        let u: f64 = rng.random();
        // Failures before the next success.
        let gap = libm::floor(libm::log1p(-u) / log_q);
        if !(gap < (candidates - i) as f64) {
            break;
        }
        i += gap as usize;
        out.push(i);
        i += 1;
        if i >= candidates {
            break;
        }
    }
    out
}

/// Dark clicks on one detector over `[0, duration)`, time-ordered.
pub fn dark_counts<R: Rng + ?Sized>(dark_rate: f64, duration: f64, port: Port, rng: &mut R) -> Vec<DetectionEvent> {
    generate_pair_times(dark_rate, duration, rng)
        .into_iter()
        .map(|time| DetectionEvent { time, port, origin: Origin::Dark })
        .collect()
}

/// Paralyzable dead time on one detector's time-ordered arrivals: an arrival
/// within `dead_time` of the previous arrival, registered or not, is lost.
pub fn apply_dead_time(arrivals: &[DetectionEvent], dead_time: f64) -> Vec<DetectionEvent> {
    let mut out = Vec::with_capacity(arrivals.len());
    let mut last = f64::NEG_INFINITY;
    for ev in arrivals {
        if ev.time - last >= dead_time {
            out.push(*ev);
        }
        last = ev.time;
    }
    out
}

fn merge_by_time(a: Vec<DetectionEvent>, b: Vec<DetectionEvent>) -> Vec<DetectionEvent> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].time <= b[j].time {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Photon arrivals at one detector before dead time: surviving pair photons
/// routed to `port`, merged with that detector's dark clicks.
fn port_arrivals<R: Rng + ?Sized, D: Rng + ?Sized>(
    pair_times: &[f64],
    ports: &[Port],
    port: Port,
    survival: f64,
    detector: &DetectorModel,
    duration: f64,
    loss_rng: &mut R,
    dark_rng: &mut D,
) -> Vec<DetectionEvent> {
    let routed: Vec<usize> = ports.iter().enumerate().filter(|(_, &p)| p == port).map(|(i, _)| i).collect();
    let photons: Vec<DetectionEvent> = thin_survivors(routed.len(), survival, loss_rng)
        .into_iter()
        .map(|k| {
            let idx = routed[k];
            DetectionEvent { time: pair_times[idx], port, origin: Origin::Pair(idx) }
        })
        .collect();
    let darks = dark_counts(detector.dark_rate, duration, port, dark_rng);
    merge_by_time(photons, darks)
}

/// Detects one arm with separate generators for photon loss and for dark
/// counts. Keeping them apart lets callers toggle dark counts without
/// perturbing which photons survive.
#[allow(clippy::too_many_arguments)]
pub fn detect_stream_split<R: Rng + ?Sized, D: Rng + ?Sized>(
    pair_times: &[f64],
    ports: &[Port],
    transmittance: f64,
    detectors: &ArmDetectors,
    temp: f64,
    duration: f64,
    loss_rng: &mut R,
    dark_rng: &mut D,
) -> Vec<DetectionEvent> {
    assert_eq!(pair_times.len(), ports.len(), "one port per pair time");
    let transmittance = transmittance.clamp(0.0, 1.0);
    let mut per_port = Port::ALL.map(|port| {
        let det = detectors.get(port);
        let survival = transmittance * detector_efficiency(det, temp);
        let arrivals = port_arrivals(pair_times, ports, port, survival, det, duration, loss_rng, dark_rng);
        apply_dead_time(&arrivals, det.dead_time)
    });
    let reflected = core::mem::take(&mut per_port[1]);
    let transmitted = core::mem::take(&mut per_port[0]);
    merge_by_time(transmitted, reflected)
}

/// Thins pair photons by `transmittance × efficiency`, adds each detector's
/// dark counts and applies paralyzable dead time per detector. Output is
/// time-ordered.
pub fn detect_stream<R: Rng + ?Sized>(
    pair_times: &[f64],
    ports: &[Port],
    transmittance: f64,
    detectors: &ArmDetectors,
    temp: f64,
    duration: f64,
    rng: &mut R,
) -> Vec<DetectionEvent> {
    let mut loss = crate::rng::seeded(rng.random());
    let mut dark = crate::rng::seeded(rng.random());
    detect_stream_split(pair_times, ports, transmittance, detectors, temp, duration, &mut loss, &mut dark)
}
