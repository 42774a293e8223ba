//! CSV rendering and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use qkdsim_core::sim::{ScanFit, ScanPoint, StepRecord};

pub const MISSION_HEADER: &str = "t_s,range_m,link_db,temp_c,pairs_generated,coincidences,accidentals_est,sifted_bits,qber,key_fraction,secret_bits_per_s";

/// Six significant digits in the style of C's `%g`: fixed notation for
/// decimal exponents in `[-4, 6)`, scientific otherwise, trailing zeros
/// dropped.
pub fn format_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Rounding to six digits first fixes the exponent (999999.5 -> 1e+06).
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Mission records as CSV. Counts are written as exact integers, a missing
/// error rate as an empty field.
pub fn mission_csv(records: &[StepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(MISSION_HEADER);
    out.push('\n');
    for r in records {
        let qber = r.qber.map(format_g6).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            format_g6(r.t),
            format_g6(r.range),
            format_g6(r.link_db),
            format_g6(r.temp),
            r.pairs_generated,
            r.coincidences,
            format_g6(r.accidentals_est),
            r.sifted_bits,
            qber,
            format_g6(r.key_fraction),
            format_g6(r.secret_bits_per_s),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Scan points as `setting,counts` with a trailing `# fit ...` comment.
pub fn scan_csv(points: &[ScanPoint], fit: &ScanFit) -> String {
    let mut out = String::from("setting,counts\n");
    for p in points {
        writeln!(out, "{},{}", format_g6(p.setting), p.counts).expect("writing to a String cannot fail");
    }
    writeln!(
        out,
        "# fit A={} V={} phi={}",
        format_g6(fit.fit.amplitude),
        format_g6(fit.fit.visibility),
        format_g6(fit.fit.phase)
    )
    .expect("writing to a String cannot fail");
    out
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
