//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per criterion
//! and exits non-zero if any fails.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use qkdsim::output::mission_csv;
use qkdsim::run_mission_parallel;
use qkdsim_core::devices::{correct_measured_rate, match_coincidences, measured_rate_paralyzable};
use qkdsim_core::link::{db_to_transmittance, total_link_db, GeometryState, OpticsConfig, ThermalProfile};
use qkdsim_core::protocol::{
    choose_basis, run_session, secret_key_length, sift, zero_rate_qber, Basis, ClassicalMessage, Initiator,
    MessageBody, RawRecord, Responder, SessionParams,
};
use qkdsim_core::rng::seeded;
use qkdsim_core::sim::{
    fit_scan, run_chsh_experiment, run_correlation_scan, run_mission, step, MissionConfig, ScanAxis, StepRecord,
};
use qkdsim_core::Error;
use rand::Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * k as f64 / n as f64).collect()
}

/// Distance between two angles modulo π.
fn half_turn_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn scan_fidelity() -> Outcome {
    let mut notes = Vec::new();
    let grid = angle_grid(36);
    let step = PI / 36.0;

    let mut c = MissionConfig::default();
    c.source.visibility = 1.0;
    let pts = run_correlation_scan(&c, ScanAxis::Angle, 0.0, &grid, 20.0, 10_000).map_err(|e| e.to_string())?;
    let fit = fit_scan(&c, ScanAxis::Angle, &pts).map_err(|e| e.to_string())?;
    let max = pts.iter().max_by_key(|p| p.counts).unwrap().setting;
    let min = pts.iter().min_by_key(|p| p.counts).unwrap().setting;
    notes.push(format!("V=1 fit {:.4} peak {:.3} trough {:.3}", fit.fit.visibility, max, min));
    if fit.fit.visibility < 0.99 {
        return Err(notes.join("; "));
    }
    // Peak with parallel analyzers, trough with orthogonal ones.
    if half_turn_distance(max, 0.0) > step + 1e-12
        || half_turn_distance(min, FRAC_PI_2) > step + 1e-12
        || half_turn_distance(fit.peak_setting, 0.0) > 0.5 * step
    {
        return Err(notes.join("; "));
    }

    c.source.visibility = 0.9;
    let pts = run_correlation_scan(&c, ScanAxis::Angle, 0.0, &grid, 20.0, 10_000).map_err(|e| e.to_string())?;
    let v = fit_scan(&c, ScanAxis::Angle, &pts).map_err(|e| e.to_string())?.fit.visibility;
    notes.push(format!("V=0.9 fit {v:.4}"));
    check((v - 0.90).abs() <= 0.03, notes.join("; "))
}

fn lcpr_shift() -> Outcome {
    let mut worst = f64::INFINITY;
    for seed in 0..10u64 {
        let mut c = MissionConfig::default();
        c.run.seed = seed;
        c.scan.axis = ScanAxis::Voltage;
        let grid = c.scan.grid(&c.lcpr_remote);
        let fixed = c.scan.fixed_setting();
        let peak_at = |temp: f64| -> Result<f64, String> {
            let pts =
                run_correlation_scan(&c, ScanAxis::Voltage, fixed, &grid, temp, 10_000).map_err(|e| e.to_string())?;
            Ok(fit_scan(&c, ScanAxis::Voltage, &pts).map_err(|e| e.to_string())?.peak_setting)
        };
        let cal = c.lcpr_remote.temp_cal;
        let warm = peak_at(cal)?;
        let cold = peak_at(cal - 10.0)?;
        worst = worst.min(cold - warm);
        if cold <= warm {
            return Err(format!("seed {seed}: cold peak {cold:.4} V not above {warm:.4} V"));
        }
    }
    Ok(format!("smallest shift {worst:.3} V over 10 seeds"))
}

fn peak_counts(c: &MissionConfig, temp: f64) -> Result<u64, String> {
    let pts = run_correlation_scan(c, ScanAxis::Angle, 0.0, &[0.0], temp, 100_000).map_err(|e| e.to_string())?;
    Ok(pts[0].counts)
}

fn brightness_vs_temperature() -> Outcome {
    let mut c = MissionConfig::default();
    if c.source.brightness_slope <= 0.0 {
        return Err("default brightness slope is not positive".into());
    }
    let mut worst_z: f64 = 0.0;
    for seed in 0..10u64 {
        c.run.seed = seed;
        let cold = peak_counts(&c, 15.0)?;
        let warm = peak_counts(&c, 24.7)?;
        if cold <= warm {
            return Err(format!("seed {seed}: {cold} at 15 C vs {warm} at 24.7 C"));
        }
        let mut other = c.clone();
        other.run.seed = seed + 1000;
        let again = peak_counts(&other, 24.7)?;
        let z = (warm as f64 - again as f64).abs() / ((warm + again) as f64).sqrt();
        worst_z = worst_z.max(z);
    }
    check(worst_z <= 4.0, format!("15 C above 24.7 C for 10 seeds; equal-temperature spread {worst_z:.2} sigma"))
}

fn link_budget() -> Outcome {
    let db = total_link_db(1e5, &OpticsConfig::default());
    let t = db_to_transmittance(30.0).map_err(|e| e.to_string())?;
    check((db - 30.0).abs() <= 3.0 && t == 1e-3, format!("100 km: {db:.3} dB; 30 dB -> {t:e}"))
}

fn chsh() -> Outcome {
    let tsirelson = 2.0 * SQRT_2;
    let mut c = MissionConfig::default();
    let mut notes = Vec::new();
    for (v, want) in [(1.0, 2.828427), (0.9, 2.545584)] {
        c.source.visibility = v;
        let e = run_chsh_experiment(&c, 1_000_000, 20.0).map_err(|e| e.to_string())?;
        let z = (e.s - want).abs() / e.std_error;
        notes.push(format!("V={v}: S={:.4} ({z:.2} sigma)", e.s));
        if z > 4.0 {
            return Err(notes.join("; "));
        }
    }
    let mut rng = seeded(2024);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..100 {
        let mut c = MissionConfig::default();
        c.source.visibility = rng.random_range(0.0..=1.0);
        c.run.seed = rng.random();
        c.run.lcpr_tracking = rng.random();
        c.lcpr_local.temp_coeff = rng.random_range(0.0..0.2);
        c.lcpr_remote.temp_coeff = rng.random_range(0.0..0.2);
        let temp = rng.random_range(0.0..40.0);
        let e = run_chsh_experiment(&c, 100_000, temp).map_err(|e| e.to_string())?;
        let z = (e.s.abs() - tsirelson) / e.std_error;
        worst = worst.max(z);
        if z > 4.0 {
            return Err(format!("config {k}: |S|={:.4} is {z:.2} sigma above the bound", e.s));
        }
    }
    notes.push(format!("100 random configs, max excess {worst:.2} sigma"));
    Ok(notes.join("; "))
}

fn set_dark_rate(c: &mut MissionConfig, rate: f64) {
    for arm in [&mut c.detectors.local, &mut c.detectors.remote] {
        arm.transmitted.dark_rate = rate;
        arm.reflected.dark_rate = rate;
    }
}

fn fixed_link(range: f64, temp: f64) -> MissionConfig {
    MissionConfig {
        geometry: GeometryState { initial_separation: range, relative_velocity: 0.0 },
        thermal: ThermalProfile::constant(temp),
        ..MissionConfig::default()
    }
}

fn qber_relation() -> Outcome {
    // A short, low-rate link: thousands of test bits per session and very few
    // multi-pair accidentals.
    let mut notes = Vec::new();
    for v in [1.0, 0.96, 0.8] {
        let mut c = fixed_link(1e3, 20.0);
        c.source.visibility = v;
        c.source.brightness_ref = 1e5;
        c.run.step_seconds = 10.0;
        c.run.exposure_seconds = 10.0;
        c.protocol.sample_fraction = 0.5;
        c.protocol.qber_abort_threshold = 0.5;
        set_dark_rate(&mut c, 0.0);
        let r = step(&c, 0).map_err(|e| e.to_string())?;
        let q = r.qber.ok_or("no QBER estimate")?;
        let n = (r.sifted_bits as f64 * c.protocol.sample_fraction).ceil();
        // Multi-pair accidentals carry a uniformly random bit.
        let a = r.accidentals_est.min(r.coincidences as f64);
        let frac = a / r.coincidences as f64;
        let expected = (1.0 - frac) * (1.0 - v) / 2.0 + 0.5 * frac;
        let sigma = (expected * (1.0 - expected) / n).sqrt();
        let z = (q - expected).abs() / sigma;
        notes.push(format!("V={v}: {q:.5} vs {expected:.5} ({z:.2} sigma, {n} bits)"));
        if z > 4.0 {
            return Err(notes.join("; "));
        }
    }

    // Darks matter where the remote singles are weak: pool 100 km sessions
    // that share every random stream except the dark counts.
    let pooled = |dark: f64| -> Result<f64, String> {
        let runs: Vec<Result<(f64, f64), String>> = (0..6u64)
            .into_par_iter()
            .map(|seed| {
                let mut c = fixed_link(1e5, 20.0);
                c.source.visibility = 1.0;
                c.run.seed = seed;
                c.run.step_seconds = 20.0;
                c.run.exposure_seconds = 20.0;
                c.protocol.sample_fraction = 0.9;
                c.protocol.qber_abort_threshold = 0.5;
                set_dark_rate(&mut c, dark);
                let r = step(&c, 0).map_err(|e| e.to_string())?;
                let n = (r.sifted_bits as f64 * c.protocol.sample_fraction).ceil();
                Ok((r.qber.ok_or("no QBER estimate")? * n, n))
            })
            .collect();
        let (mut errs, mut bits) = (0.0, 0.0);
        for r in runs {
            let (e, n) = r?;
            errs += e;
            bits += n;
        }
        Ok(errs / bits)
    };
    let quiet = pooled(0.0)?;
    let noisy = pooled(500.0)?;
    notes.push(format!("100 km darks off {quiet:.5}, 500 cps {noisy:.5}"));
    check(noisy > quiet, notes.join("; "))
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn bisect_zero_rate(f: f64) -> f64 {
    let (mut lo, mut hi) = (1e-6, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - (1.0 + f) * h2(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn flip_records(n: usize, flip_p: f64, seed: u64) -> (Vec<RawRecord>, Vec<RawRecord>) {
    let mut rng = seeded(seed);
    let mut local = Vec::with_capacity(n);
    let mut remote = Vec::with_capacity(n);
    for i in 0..n {
        let (ba, bb) = (choose_basis(&mut rng), choose_basis(&mut rng));
        let bit: bool = rng.random();
        let flip = rng.random::<f64>() < flip_p;
        local.push(RawRecord { index: i, basis: ba, bit, time: i as f64 * 1e-6 });
        remote.push(RawRecord { index: i, basis: bb, bit: bit ^ flip, time: i as f64 * 1e-6 });
    }
    (local, remote)
}

fn key_threshold() -> Outcome {
    let f = 1.0;
    let oracle = bisect_zero_rate(f);
    let q0 = zero_rate_qber(f).map_err(|e| e.to_string())?;
    if (q0 - oracle).abs() > 1e-9 || (q0 - 0.110).abs() > 0.0005 {
        return Err(format!("zero-rate point {q0:.6}, oracle {oracle:.6}"));
    }
    for k in 0..=1000 {
        let q = q0 + (0.5 - q0) * k as f64 / 1000.0;
        if secret_key_length(10_000, q, f).map_err(|e| e.to_string())? != 0 {
            return Err(format!("key at QBER {q}"));
        }
        let q = 0.09 * k as f64 / 1000.0;
        if secret_key_length(10_000, q, f).map_err(|e| e.to_string())? == 0 {
            return Err(format!("no key at QBER {q}"));
        }
    }
    // Full sessions at about 10^4 sifted bits.
    let params = SessionParams { ec_efficiency: f, ..SessionParams::default() };
    let (mut high, mut low) = (0, 0);
    let mut tally = |qber: f64, secret: usize, sifted: usize| -> Result<(), String> {
        if qber >= 0.11 {
            high += 1;
            if secret != 0 {
                return Err(format!("session at QBER {qber:.4} kept {secret} bits"));
            }
        }
        if qber <= 0.09 {
            low += 1;
            if secret == 0 {
                return Err(format!("session at QBER {qber:.4} with {sifted} sifted bits has no key"));
            }
        }
        Ok(())
    };
    for seed in 0..60u64 {
        let p = 0.002 + 0.2 * seed as f64 / 60.0;
        let (l, r) = flip_records(20_000, p, seed);
        let out = run_session(&l, &r, &params, &mut seeded(seed + 77)).map_err(|e| e.to_string())?;
        tally(out.key.qber, out.key.secret_length, out.key.sifted_bits)?;
    }
    // A session whose sample shows exactly 11 % errors.
    let (l, r) = flip_records(10_000, 0.0, 5);
    let r: Vec<RawRecord> = r.into_iter().zip(&l).map(|(x, y)| RawRecord { basis: y.basis, ..x }).collect();
    let mut rng = seeded(6);
    let mut init = Initiator::new(&l, params.clone(), &mut rng);
    let mut resp = Responder::new(&r);
    let mut sent = init.receive(&resp.start().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for m in &sent {
        report.extend(resp.receive(m).map_err(|e| e.to_string())?);
    }
    if let [ClassicalMessage { body: MessageBody::QberReport(bits), .. }] = report.as_mut_slice() {
        let n = bits.len();
        if n % 100 != 0 {
            return Err(format!("test sample of {n} bits cannot show exactly 11 %"));
        }
        for b in bits.iter_mut().take(n * 11 / 100) {
            *b = !*b;
        }
    } else {
        return Err("expected a single QBER report".into());
    }
    sent = init.receive(&report[0]).map_err(|e| e.to_string())?;
    let k = init.key().ok_or("no outcome")?;
    if k.qber != 0.11 || !matches!(sent[0].body, MessageBody::Abort { .. }) {
        return Err(format!("session at QBER {} did not abort", k.qber));
    }
    tally(k.qber, k.secret_length, k.sifted_bits)?;
    Ok(format!("zero-rate {q0:.6} (oracle {oracle:.6}); {low} sessions below 0.09, {high} at or above 0.11"))
}

fn dead_time_round_trip() -> Outcome {
    let mut worst: f64 = 0.0;
    for &tau in &[1e-9, 45e-9, 100e-9, 1e-6, 22e-6] {
        for k in 0..=600 {
            let x = 10f64.powf(-6.0 + 6.0 * k as f64 / 600.0);
            let n = x / tau;
            let back = correct_measured_rate(measured_rate_paralyzable(n, tau), tau).map_err(|e| e.to_string())?;
            worst = worst.max((back / n - 1.0).abs());
        }
    }
    check(worst < 1e-9, format!("max relative error {worst:.2e}"))
}

fn brute_force(a: &[f64], b: &[f64], window: f64) -> usize {
    fn go(i: usize, a: &[f64], b: &[f64], used: &mut [bool], window: f64) -> usize {
        if i == a.len() {
            return 0;
        }
        let mut best = go(i + 1, a, b, used, window);
        for j in 0..b.len() {
            if !used[j] && (a[i] - b[j]).abs() <= 0.5 * window {
                used[j] = true;
                best = best.max(1 + go(i + 1, a, b, used, window));
                used[j] = false;
            }
        }
        best
    }
    go(0, a, b, &mut vec![false; b.len()], window)
}

fn matcher() -> Outcome {
    let mut rng = seeded(909);
    for inst in 0..500 {
        let total = rng.random_range(0..=12usize);
        let na = rng.random_range(0..=total);
        let window = rng.random_range(0.05..1.0);
        let mut draw = |n: usize| {
            let mut v: Vec<f64> = (0..n).map(|_| (rng.random_range(0.0..4.0f64) * 64.0).round() / 64.0).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let a = draw(na);
        let b = draw(total - na);
        let greedy = match_coincidences(&a, &b, window);
        let distinct_a: HashSet<usize> = greedy.iter().map(|p| p.0).collect();
        let distinct_b: HashSet<usize> = greedy.iter().map(|p| p.1).collect();
        let valid = distinct_a.len() == greedy.len()
            && distinct_b.len() == greedy.len()
            && greedy.iter().all(|&(i, j)| (a[i] - b[j]).abs() <= 0.5 * window * (1.0 + 1e-9));
        let best = brute_force(&a, &b, window);
        if !valid || greedy.len() != best {
            return Err(format!("instance {inst}: greedy {} vs optimal {best}", greedy.len()));
        }
    }
    Ok("500 instances agree".into())
}

fn mission_sweep() -> Outcome {
    let ranges_km = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
    let jobs: Vec<(usize, u64)> = (0..ranges_km.len()).flat_map(|r| (0..10u64).map(move |s| (r, s))).collect();
    let rates: Vec<Result<f64, String>> = jobs
        .par_iter()
        .map(|&(r, seed)| {
            let mut c = fixed_link(ranges_km[r] * 1e3, 20.0);
            c.run.seed = seed;
            step(&c, 0).map(|rec| rec.secret_bits_per_s).map_err(|e| e.to_string())
        })
        .collect();
    let mut means = vec![0.0; ranges_km.len()];
    for (&(r, _), rate) in jobs.iter().zip(rates) {
        means[r] += rate? / 10.0;
    }
    let listing: Vec<String> = ranges_km.iter().zip(&means).map(|(l, m)| format!("{l} km {m:.0}")).collect();
    if means.windows(2).any(|w| w[1] > w[0]) {
        return Err(format!("mean secret bits/s not non-increasing: {}", listing.join(", ")));
    }

    let mut c = MissionConfig::default();
    c.run.step_seconds = 2000.0;
    c.run.total_seconds = 20_000.0;
    c.run.exposure_seconds = 0.1;
    c.run.seed = 4242;
    let csv = |c: &MissionConfig| -> Result<String, String> {
        Ok(mission_csv(&run_mission_parallel(c).map_err(|e| e.to_string())?))
    };
    let first = csv(&c)?;
    let second = csv(&c)?;
    let serial: Vec<StepRecord> = run_mission(&c).map_err(|e| e.to_string())?;
    c.run.seed = 4243;
    let other = csv(&c)?;
    check(
        first == second && first == mission_csv(&serial) && first != other,
        format!("{}; same seed byte-identical", listing.join(", ")),
    )
}

/// Everything a session reveals, checked against what the parties hold.
fn audit(local: &[RawRecord], remote: &[RawRecord], transcript: &[ClassicalMessage]) -> Result<usize, String> {
    let mut sifted_remote: Vec<bool> = Vec::new();
    let mut sample: Vec<usize> = Vec::new();
    let mut revealed = 0;
    for msg in transcript {
        match &msg.body {
            MessageBody::BasisAnnounce(bases) => {
                let own: Vec<Basis> = remote.iter().map(|r| r.basis).collect();
                if bases != &own {
                    return Err("basis announcement is not the bases alone".into());
                }
                sifted_remote =
                    sift(remote, &local.iter().map(|r| r.basis).collect::<Vec<_>>()).map_err(|e| e.to_string())?.bits;
            }
            MessageBody::SiftIndices(_) => {}
            MessageBody::QberSample(pos) => sample = pos.clone(),
            MessageBody::QberReport(bits) => {
                let expected: Vec<bool> = sample.iter().map(|&p| sifted_remote[p]).collect();
                if bits != &expected {
                    return Err("report carries bits outside the test sample".into());
                }
                revealed += bits.len();
            }
            MessageBody::Abort { .. } => {}
            MessageBody::KeyParams { seed, .. } => {
                let tested: HashSet<usize> = sample.iter().copied().collect();
                let key_bits: Vec<bool> =
                    (0..sifted_remote.len()).filter(|i| !tested.contains(i)).map(|i| sifted_remote[i]).collect();
                if key_bits.len() >= 32 && seed.windows(key_bits.len()).any(|w| w == key_bits.as_slice()) {
                    return Err("hash seed contains the raw key".into());
                }
            }
        }
        // The wire form must not carry anything beyond the parsed message.
        let line = msg.to_string();
        if ClassicalMessage::parse_line(&line).map_err(|e| e.to_string())? != *msg {
            return Err("message does not round-trip".into());
        }
    }
    Ok(revealed)
}

fn protocol_hygiene() -> Outcome {
    let params = SessionParams::default();
    let mut revealed = 0;
    for seed in 0..100u64 {
        let (l, r) = flip_records(2000, 0.002 * (seed % 40) as f64, seed);
        let out = run_session(&l, &r, &params, &mut seeded(seed ^ 0xabc)).map_err(|e| e.to_string())?;
        revealed += audit(&l, &r, &out.transcript).map_err(|e| format!("session {seed}: {e}"))?;
    }

    // Grammar: each party rejects a message arriving ahead of its turn.
    let (l, r) = flip_records(500, 0.01, 1);
    let out = run_session(&l, &r, &params, &mut seeded(2)).map_err(|e| e.to_string())?;
    let msgs = &out.transcript;
    let mut rng = seeded(2);
    let mut init = Initiator::new(&l, params.clone(), &mut rng);
    let early_report = init.receive(&msgs[3]);
    let mut resp = Responder::new(&r);
    resp.start().map_err(|e| e.to_string())?;
    let early_sample = resp.receive(&msgs[2]);
    let mut resp2 = Responder::new(&r);
    let unstarted = resp2.receive(&msgs[1]);
    let rejected = [early_report, early_sample, unstarted].iter().all(|e| matches!(e, Err(Error::Session(_))));
    check(rejected, format!("100 sessions, {revealed} bits revealed, all from test samples; out-of-order rejected"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("scan fidelity", scan_fidelity),
        ("LCPR shift", lcpr_shift),
        ("brightness vs temperature", brightness_vs_temperature),
        ("link budget", link_budget),
        ("CHSH", chsh),
        ("QBER relation", qber_relation),
        ("key threshold", key_threshold),
        ("dead-time round trip", dead_time_round_trip),
        ("coincidence matcher", matcher),
        ("mission sweep", mission_sweep),
        ("protocol hygiene", protocol_hygiene),
    ];
    let results: Vec<Outcome> = criteria.par_iter().map(|(_, f)| f()).collect();
    let mut failed = 0;
    for (k, ((name, _), res)) in criteria.iter().zip(results).enumerate() {
        match res {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
