use alloc::vec::Vec;

/// Whether two timestamps fall in one coincidence window. `window` is the
/// full width, so the tolerance is `window / 2` either side. The boundary is
/// inclusive up to float rounding.
#[inline]
pub fn within_window(ta: f64, tb: f64, window: f64) -> bool {
    (ta - tb).abs() <= 0.5 * window * (1.0 + 1e-9)
}

/// Pairs events of two time-ordered streams that lie within one coincidence
/// window, each event used at most once.
///
/// Single pass with two cursors: when the heads of both streams coincide they
/// are paired, otherwise the earlier head can never coincide with anything
/// later in the other stream and is dropped. This yields a maximum-cardinality
/// matching. Returns `(index_a, index_b)` pairs in time order.
pub fn match_coincidences(stream_a: &[f64], stream_b: &[f64], window: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < stream_a.len() && j < stream_b.len() {
        let (ta, tb) = (stream_a[i], stream_b[j]);
        if within_window(ta, tb, window) {
            out.push((i, j));
            i += 1;
            j += 1;
        } else if ta < tb {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Expected accidental coincidence rate `S_A · S_B · window` for
/// uncorrelated singles, with `window` the full matching width.
pub fn accidental_rate(singles_a: f64, singles_b: f64, window: f64) -> f64 {
    singles_a * singles_b * window
}
