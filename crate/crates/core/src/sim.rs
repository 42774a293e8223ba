//! Time-stepped mission runs and canned experiments.
//!
//! Each step is an independent acquisition of `exposure_seconds` followed by
//! a complete protocol session on that step's coincidences. All randomness of
//! a step comes from counter-based streams keyed by `(seed, step index)`, so
//! steps can be evaluated in any order or concurrently.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::devices::{
    accidental_rate, detect_stream_split, drive_voltage, fit_correlation_curve, generate_pair_times, lcpr_rotation,
    match_coincidences, source_brightness, ArmDetectors, CurveFit, DetectionEvent, LcprModel, Origin, SourceModel,
};
use crate::link::{
    db_to_transmittance, separation_at, temperature_at, total_link_db, GeometryState, OpticsConfig, ThermalProfile,
};
use crate::polarization::{werner_state, AnalyzerAngle, OutcomeDistribution, Port, CHSH_ANGLES};
use crate::protocol::{choose_basis, key_fraction, run_session, Basis, RawRecord, SessionParams};
use crate::rng::{stream, Purpose, SimRng};
use crate::{Error, Result};

/// Which satellite hosts the source. The source's own arm is detected on
/// board with no link loss; the other arm crosses the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Direction {
    #[default]
    LocalToRemote,
    RemoteToLocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum ScanAxis {
    /// Scan the ideal analyzer angle of the remote arm, radians.
    #[default]
    Angle,
    /// Scan the raw drive voltage of the remote LCPR, volts.
    Voltage,
}

/// The four detectors, two per satellite.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct DetectorSet {
    pub local: ArmDetectors,
    pub remote: ArmDetectors,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct RunParams {
    /// Spacing of mission records, s.
    pub step_seconds: f64,
    /// Mission span, s.
    pub total_seconds: f64,
    /// Acquisition time simulated per step, s. At most `step_seconds`.
    pub exposure_seconds: f64,
    pub seed: u64,
    /// Full width of the coincidence window, s.
    pub coincidence_window: f64,
    pub direction: Direction,
    /// Recompute LCPR drive voltages at the current temperature. When off,
    /// drives are those calibrated at each LCPR's `temp_cal`.
    pub lcpr_tracking: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            step_seconds: 1.0e4,
            total_seconds: 1.0e6,
            exposure_seconds: 1.0,
            seed: 1,
            coincidence_window: 1.0e-9,
            direction: Direction::LocalToRemote,
            lcpr_tracking: true,
        }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_seconds > 0.0 && self.step_seconds.is_finite()) {
            return Err(Error::invalid("step_seconds", "must be positive"));
        }
        if !(self.total_seconds >= self.step_seconds && self.total_seconds.is_finite()) {
            return Err(Error::invalid("total_seconds", "must be at least step_seconds"));
        }
        if !(self.exposure_seconds > 0.0 && self.exposure_seconds <= self.step_seconds) {
            return Err(Error::invalid("exposure_seconds", "must lie in (0, step_seconds]"));
        }
        if !(self.coincidence_window > 0.0 && self.coincidence_window.is_finite()) {
            return Err(Error::invalid("coincidence_window", "must be positive"));
        }
        Ok(())
    }
}

/// Settings for the correlation-scan experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct ScanConfig {
    pub axis: ScanAxis,
    /// Local analyzer angle, rad. Defaults to 0 on the angle axis and π/4 on
    /// the voltage axis.
    pub fixed_setting: Option<f64>,
    pub points: usize,
    /// Defaults to 0 rad or the remote LCPR's `v_min`.
    pub grid_start: Option<f64>,
    /// Defaults to π (exclusive) or the remote LCPR's `v_max` (inclusive).
    pub grid_stop: Option<f64>,
    /// °C.
    pub temp: f64,
    pub samples_per_point: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            axis: ScanAxis::Angle,
            fixed_setting: None,
            points: 36,
            grid_start: None,
            grid_stop: None,
            temp: 20.0,
            samples_per_point: 10_000,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points < 8 {
            return Err(Error::invalid("points", "must be at least 8 for the curve fit"));
        }
        if self.samples_per_point == 0 {
            return Err(Error::invalid("samples_per_point", "must be positive"));
        }
        if !self.temp.is_finite() {
            return Err(Error::invalid("temp", "must be finite"));
        }
        if self.fixed_setting.is_some_and(|v| !v.is_finite()) {
            return Err(Error::invalid("fixed_setting", "must be finite"));
        }
        Ok(())
    }

    pub fn fixed_setting(&self) -> f64 {
        self.fixed_setting.unwrap_or(match self.axis {
            ScanAxis::Angle => 0.0,
            ScanAxis::Voltage => FRAC_PI_4,
        })
    }

    /// The scan grid. The angle axis covers a half turn without repeating
    /// its endpoint; the voltage axis includes both ends.
    pub fn grid(&self, lcpr: &LcprModel) -> Vec<f64> {
        let n = self.points;
        match self.axis {
            ScanAxis::Angle => {
                let lo = self.grid_start.unwrap_or(0.0);
                let hi = self.grid_stop.unwrap_or(PI);
                (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
            }
            ScanAxis::Voltage => {
                let lo = self.grid_start.unwrap_or(lcpr.v_min);
                let hi = self.grid_stop.unwrap_or(lcpr.v_max);
                let div = (n.max(2) - 1) as f64;
                (0..n).map(|i| lo + (hi - lo) * i as f64 / div).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct ChshConfig {
    pub samples: u64,
    /// °C.
    pub temp: f64,
}

impl Default for ChshConfig {
    fn default() -> Self {
        ChshConfig { samples: 1_000_000, temp: 20.0 }
    }
}

impl ChshConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1000 {
            return Err(Error::invalid("samples", "must be at least 1000"));
        }
        if !self.temp.is_finite() {
            return Err(Error::invalid("temp", "must be finite"));
        }
        Ok(())
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct MissionConfig {
    pub source: SourceModel,
    pub lcpr_local: LcprModel,
    pub lcpr_remote: LcprModel,
    pub detectors: DetectorSet,
    pub optics: OpticsConfig,
    pub geometry: GeometryState,
    pub thermal: ThermalProfile,
    pub protocol: SessionParams,
    pub run: RunParams,
    pub scan: ScanConfig,
    pub chsh: ChshConfig,
}

impl MissionConfig {
    /// Checks every invariant; errors carry the dotted path of the field.
    pub fn validate(&self) -> Result<()> {
        self.source.validate().map_err(|e| e.in_section("source"))?;
        self.lcpr_local.validate().map_err(|e| e.in_section("lcpr_local"))?;
        self.lcpr_remote.validate().map_err(|e| e.in_section("lcpr_remote"))?;
        for (side, arm) in [("local", &self.detectors.local), ("remote", &self.detectors.remote)] {
            for (port, det) in [("transmitted", &arm.transmitted), ("reflected", &arm.reflected)] {
                det.validate().map_err(|e| e.in_section(port).in_section(side).in_section("detectors"))?;
            }
        }
        self.optics.validate().map_err(|e| e.in_section("optics"))?;
        self.geometry.validate().map_err(|e| e.in_section("geometry"))?;
        self.thermal.validate().map_err(|e| e.in_section("thermal"))?;
        self.protocol.validate().map_err(|e| e.in_section("protocol"))?;
        self.run.validate().map_err(|e| e.in_section("run"))?;
        self.scan.validate().map_err(|e| e.in_section("scan"))?;
        self.chsh.validate().map_err(|e| e.in_section("chsh"))?;
        Ok(())
    }

    /// Number of records in a mission run.
    pub fn step_count(&self) -> usize {
        // Tolerate rounding in total / step for spans that are exact multiples.
        libm::floor(self.run.total_seconds / self.run.step_seconds * (1.0 + 1e-12)) as usize
    }

    /// Mission time stamped on record `index`: the end of its step.
    pub fn step_time(&self, index: usize) -> f64 {
        (index as f64 + 1.0) * self.run.step_seconds
    }
}

/// One row of mission output.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// s.
    pub t: f64,
    /// m.
    pub range: f64,
    pub link_db: f64,
    /// °C.
    pub temp: f64,
    pub pairs_generated: u64,
    pub coincidences: u64,
    /// Expected accidental coincidences over the exposure, from singles.
    pub accidentals_est: f64,
    pub sifted_bits: u64,
    /// `None` when too few bits were sifted to estimate it.
    pub qber: Option<f64>,
    pub key_fraction: f64,
    pub secret_bits_per_s: f64,
}

fn realized_angle(lcpr: &LcprModel, target: AnalyzerAngle, temp: f64, tracking: bool) -> Result<AnalyzerAngle> {
    let drive_temp = if tracking { temp } else { lcpr.temp_cal };
    lcpr_rotation(lcpr, drive_voltage(lcpr, target, drive_temp), temp)
}

/// Realizes an arbitrary analyzer setting with a rotator limited to a quarter
/// turn: the analyzer at `θ + π/2` is the one at `θ` with its ports swapped.
/// Returns the realized angle and the port that plays the transmitted role.
fn realized_setting(lcpr: &LcprModel, setting: f64, temp: f64, tracking: bool) -> Result<(AnalyzerAngle, Port)> {
    let theta = crate::polarization::normalize_half_turn(AnalyzerAngle::new(setting)?.radians());
    let (base, port) =
        if theta < FRAC_PI_2 { (theta, Port::Transmitted) } else { (theta - FRAC_PI_2, Port::Reflected) };
    Ok((realized_angle(lcpr, AnalyzerAngle::new(base)?, temp, tracking)?, port))
}

/// Analyzer angles actually realized for each basis on one side.
fn basis_angles(lcpr: &LcprModel, temp: f64, tracking: bool) -> Result<[AnalyzerAngle; 2]> {
    Ok([
        realized_angle(lcpr, Basis::Rectilinear.angle(), temp, tracking)?,
        realized_angle(lcpr, Basis::Diagonal.angle(), temp, tracking)?,
    ])
}

/// Per-pair measurement settings and outcomes on both sides.
struct PairOutcomes {
    local_bases: Vec<Basis>,
    remote_bases: Vec<Basis>,
    local_ports: Vec<Port>,
    remote_ports: Vec<Port>,
}

fn sample_pairs(config: &MissionConfig, temp: f64, n: usize, rng: &mut SimRng) -> Result<PairOutcomes> {
    let state = werner_state(config.source.visibility)?;
    let tracking = config.run.lcpr_tracking;
    let la = basis_angles(&config.lcpr_local, temp, tracking)?;
    let ra = basis_angles(&config.lcpr_remote, temp, tracking)?;
    let dists = [
        [OutcomeDistribution::new(&state, la[0], ra[0]), OutcomeDistribution::new(&state, la[0], ra[1])],
        [OutcomeDistribution::new(&state, la[1], ra[0]), OutcomeDistribution::new(&state, la[1], ra[1])],
    ];
    let mut out = PairOutcomes {
        local_bases: Vec::with_capacity(n),
        remote_bases: Vec::with_capacity(n),
        local_ports: Vec::with_capacity(n),
        remote_ports: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let bl = choose_basis(rng);
        let br = choose_basis(rng);
        let (pl, pr) = dists[bl.index()][br.index()].sample(rng);
        out.local_bases.push(bl);
        out.remote_bases.push(br);
        out.local_ports.push(pl);
        out.remote_ports.push(pr);
    }
    Ok(out)
}

/// Bases for each detection: the pair's basis for pair photons, a fresh
/// draw from `dark_rng` for dark clicks.
fn event_bases(events: &[DetectionEvent], pair_bases: &[Basis], dark_rng: &mut SimRng) -> Vec<Basis> {
    events
        .iter()
        .map(|ev| match ev.origin {
            Origin::Pair(i) => pair_bases[i],
            Origin::Dark => choose_basis(dark_rng),
        })
        .collect()
}

/// Simulates one acquisition at mission time `t` using the random streams of
/// step `step_index`.
pub fn simulate_step(config: &MissionConfig, step_index: usize, t: f64) -> Result<StepRecord> {
    let run = &config.run;
    let seed = run.seed;
    let idx = step_index as u64;
    let exposure = run.exposure_seconds;

    let temp = temperature_at(&config.thermal, t);
    let range = separation_at(&config.geometry, t);
    let link_db = total_link_db(range, &config.optics);
    let link_t = db_to_transmittance(link_db)?;
    let (local_t, remote_t) = match run.direction {
        Direction::LocalToRemote => (1.0, link_t),
        Direction::RemoteToLocal => (link_t, 1.0),
    };

    let brightness = source_brightness(&config.source, temp);
    let pair_times = generate_pair_times(brightness, exposure, &mut stream(seed, idx, Purpose::PairTimes));
    let pairs = sample_pairs(config, temp, pair_times.len(), &mut stream(seed, idx, Purpose::Outcomes))?;

    let mut local_dark = stream(seed, idx, Purpose::LocalDark);
    let mut remote_dark = stream(seed, idx, Purpose::RemoteDark);
    let local_events = detect_stream_split(
        &pair_times,
        &pairs.local_ports,
        local_t,
        &config.detectors.local,
        temp,
        exposure,
        &mut stream(seed, idx, Purpose::LocalDetection),
        &mut local_dark,
    );
    let remote_events = detect_stream_split(
        &pair_times,
        &pairs.remote_ports,
        remote_t,
        &config.detectors.remote,
        temp,
        exposure,
        &mut stream(seed, idx, Purpose::RemoteDetection),
        &mut remote_dark,
    );
    let local_bases = event_bases(&local_events, &pairs.local_bases, &mut local_dark);
    let remote_bases = event_bases(&remote_events, &pairs.remote_bases, &mut remote_dark);

    let lt: Vec<f64> = local_events.iter().map(|e| e.time).collect();
    let rt: Vec<f64> = remote_events.iter().map(|e| e.time).collect();
    let matches = match_coincidences(&lt, &rt, run.coincidence_window);

    let mut local_records = Vec::with_capacity(matches.len());
    let mut remote_records = Vec::with_capacity(matches.len());
    for (k, &(i, j)) in matches.iter().enumerate() {
        local_records.push(RawRecord { index: k, basis: local_bases[i], bit: local_events[i].port.bit(), time: lt[i] });
        remote_records.push(RawRecord {
            index: k,
            basis: remote_bases[j],
            bit: remote_events[j].port.bit(),
            time: rt[j],
        });
    }

    let accidentals_est =
        accidental_rate(lt.len() as f64 / exposure, rt.len() as f64 / exposure, run.coincidence_window) * exposure;

    let mut protocol_rng = stream(seed, idx, Purpose::Protocol);
    let (sifted_bits, qber, secret_bits) =
        match run_session(&local_records, &remote_records, &config.protocol, &mut protocol_rng) {
            Ok(out) => {
                let secret = if out.key.aborted { 0 } else { out.key.secret_length };
                (out.key.sifted_bits, Some(out.key.qber), secret)
            }
            Err(Error::InsufficientData { have, .. }) => (have, None, 0),
            Err(e) => return Err(e),
        };
    let fraction = match qber {
        Some(q) => key_fraction(q.min(0.5), config.protocol.ec_efficiency)?,
        None => 0.0,
    };

    Ok(StepRecord {
        t,
        range,
        link_db,
        temp,
        pairs_generated: pair_times.len() as u64,
        coincidences: matches.len() as u64,
        accidentals_est,
        sifted_bits: sifted_bits as u64,
        qber,
        key_fraction: fraction,
        secret_bits_per_s: secret_bits as f64 / exposure,
    })
}

/// Record `step_index` of a mission run.
pub fn step(config: &MissionConfig, step_index: usize) -> Result<StepRecord> {
    simulate_step(config, step_index, config.step_time(step_index))
}

/// All records of a mission, in time order.
pub fn run_mission(config: &MissionConfig) -> Result<Vec<StepRecord>> {
    config.validate()?;
    (0..config.step_count()).map(|k| step(config, k)).collect()
}

/// One point of a correlation scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    /// Radians or volts, per the scan axis.
    pub setting: f64,
    /// Coincidences with each photon on the port projecting onto its
    /// analyzer setting.
    pub counts: u64,
}

/// Fixes the local analyzer at `fixed_setting` (rad) and scans the remote
/// arm over `grid`. Both arms see unit link transmittance; detectors, dark
/// counts and dead time apply as configured. Each point runs for
/// `samples_per_point / brightness_ref` seconds of source time, so the
/// number of pairs follows the source brightness at `temp`. Angle settings
/// beyond the rotator's quarter turn are reached by swapping ports.
pub fn run_correlation_scan(
    config: &MissionConfig,
    axis: ScanAxis,
    fixed_setting: f64,
    grid: &[f64],
    temp: f64,
    samples_per_point: u64,
) -> Result<Vec<ScanPoint>> {
    if grid.is_empty() {
        return Err(Error::Domain("scan grid must not be empty"));
    }
    let state = werner_state(config.source.visibility)?;
    let tracking = config.run.lcpr_tracking;
    let (fixed, local_port) = realized_setting(&config.lcpr_local, fixed_setting, temp, tracking)?;
    let duration = samples_per_point as f64 / config.source.brightness_ref;
    let brightness = source_brightness(&config.source, temp);
    let seed = config.run.seed;

    grid.iter()
        .enumerate()
        .map(|(k, &setting)| {
            let (remote, remote_port) = match axis {
                ScanAxis::Angle => realized_setting(&config.lcpr_remote, setting, temp, tracking)?,
                ScanAxis::Voltage => (lcpr_rotation(&config.lcpr_remote, setting, temp)?, Port::Transmitted),
            };
            let dist = OutcomeDistribution::new(&state, fixed, remote);
            let idx = k as u64;
            let times = generate_pair_times(brightness, duration, &mut stream(seed, idx, Purpose::PairTimes));
            let mut rng = stream(seed, idx, Purpose::Outcomes);
            let (lp, rp): (Vec<Port>, Vec<Port>) = times.iter().map(|_| dist.sample(&mut rng)).unzip();
            let detect = |ports: &[Port], arm: &ArmDetectors, loss: Purpose, dark: Purpose| {
                detect_stream_split(
                    &times,
                    ports,
                    1.0,
                    arm,
                    temp,
                    duration,
                    &mut stream(seed, idx, loss),
                    &mut stream(seed, idx, dark),
                )
            };
            let le = detect(&lp, &config.detectors.local, Purpose::LocalDetection, Purpose::LocalDark);
            let re = detect(&rp, &config.detectors.remote, Purpose::RemoteDetection, Purpose::RemoteDark);
            let lt: Vec<f64> = le.iter().map(|e| e.time).collect();
            let rt: Vec<f64> = re.iter().map(|e| e.time).collect();
            let counts = match_coincidences(&lt, &rt, config.run.coincidence_window)
                .into_iter()
                .filter(|&(i, j)| le[i].port == local_port && re[j].port == remote_port)
                .count() as u64;
            Ok(ScanPoint { setting, counts })
        })
        .collect()
}

/// Runs the scan described by `config.scan`.
pub fn run_configured_scan(config: &MissionConfig) -> Result<Vec<ScanPoint>> {
    let scan = &config.scan;
    let grid = scan.grid(&config.lcpr_remote);
    run_correlation_scan(config, scan.axis, scan.fixed_setting(), &grid, scan.temp, scan.samples_per_point)
}

/// Fit of a scan, with the peak expressed in the scan's own units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanFit {
    pub fit: CurveFit,
    /// Radians on the angle axis, volts on the voltage axis.
    pub peak_setting: f64,
}

/// Fits `A (1 + V cos(2x − φ)) / 2` to a scan. Voltages are mapped linearly
/// onto `x ∈ [0, π/2]` across the remote LCPR's range before fitting.
pub fn fit_scan(config: &MissionConfig, axis: ScanAxis, points: &[ScanPoint]) -> Result<ScanFit> {
    let lcpr = &config.lcpr_remote;
    let span = lcpr.v_max - lcpr.v_min;
    let to_x = |s: f64| match axis {
        ScanAxis::Angle => s,
        ScanAxis::Voltage => FRAC_PI_2 * (s - lcpr.v_min) / span,
    };
    let data: Vec<(f64, f64)> = points.iter().map(|p| (to_x(p.setting), p.counts as f64)).collect();
    let fit = fit_correlation_curve(&data)?;
    let peak_setting = match axis {
        ScanAxis::Angle => fit.peak_position(),
        ScanAxis::Voltage => lcpr.v_min + fit.peak_position() * span / FRAC_PI_2,
    };
    Ok(ScanFit { fit, peak_setting })
}

/// CHSH estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshEstimate {
    pub s: f64,
    pub std_error: f64,
    /// `Ê(a,b), Ê(a,b'), Ê(a',b), Ê(a',b')`.
    pub correlations: [f64; 4],
}

impl ChshEstimate {
    /// `S − 4σ > 2`.
    pub fn witnesses_entanglement(&self) -> bool {
        self.s - 4.0 * self.std_error > 2.0
    }
}

/// Samples `n_samples / 4` pairs at each of the four canonical setting
/// pairs, with analyzer angles realized through the LCPRs at `temp`.
pub fn run_chsh_experiment(config: &MissionConfig, n_samples: u64, temp: f64) -> Result<ChshEstimate> {
    if n_samples < 1000 {
        return Err(Error::Domain("CHSH run needs at least 1000 samples"));
    }
    let state = werner_state(config.source.visibility)?;
    let tracking = config.run.lcpr_tracking;
    let [a, a2, b, b2] = CHSH_ANGLES;
    let settings = [(a, b), (a, b2), (a2, b), (a2, b2)];
    let per = n_samples / 4;
    let mut correlations = [0.0; 4];
    let mut variance = 0.0;
    for (k, (ta, tb)) in settings.into_iter().enumerate() {
        let ta = realized_angle(&config.lcpr_local, ta, temp, tracking)?;
        let tb = realized_angle(&config.lcpr_remote, tb, temp, tracking)?;
        let dist = OutcomeDistribution::new(&state, ta, tb);
        let mut rng = stream(config.run.seed, k as u64, Purpose::Outcomes);
        let same = (0..per).filter(|_| {
            let (pa, pb) = dist.sample(&mut rng);
            pa == pb
        });
        let same = same.count() as f64;
        let n = per as f64;
        let e = (2.0 * same - n) / n;
        correlations[k] = e;
        variance += (1.0 - e * e) / n;
    }
    let s = correlations[0] - correlations[1] + correlations[2] + correlations[3];
    Ok(ChshEstimate { s, std_error: libm::sqrt(variance), correlations })
}
