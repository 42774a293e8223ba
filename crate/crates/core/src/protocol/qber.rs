use alloc::vec::Vec;

use rand::Rng;

use crate::{Error, Result};

/// Fewer sifted bits than this and no error rate is estimated.
pub const MIN_SIFTED_FOR_QBER: usize = 10;

/// Picks `⌈fraction · sifted_count⌉` distinct positions uniformly at random by
/// a partial Fisher–Yates shuffle. Returned ascending.
pub fn select_test_positions<R: Rng + ?Sized>(sifted_count: usize, fraction: f64, rng: &mut R) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Domain("sample fraction must lie strictly between 0 and 1"));
    }
    if sifted_count < MIN_SIFTED_FOR_QBER {
        return Err(Error::InsufficientData { have: sifted_count, need: MIN_SIFTED_FOR_QBER });
    }
    let k = (libm::ceil(fraction * sifted_count as f64) as usize).min(sifted_count);
    let mut pool: Vec<usize> = (0..sifted_count).collect();
    for i in 0..k {
        let j = rng.random_range(i..sifted_count);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    Ok(pool)
}

/// Fraction of disagreements between `local_bits` at `positions` and the
/// other party's revealed bits for the same positions.
pub fn qber_from_sample(local_bits: &[bool], positions: &[usize], remote_sample: &[bool]) -> Result<f64> {
    if positions.len() != remote_sample.len() {
        return Err(Error::Protocol("revealed sample length differs from requested positions"));
    }
    if positions.is_empty() {
        return Err(Error::InsufficientData { have: 0, need: 1 });
    }
    let mut errors = 0usize;
    for (&p, &rb) in positions.iter().zip(remote_sample) {
        let lb = *local_bits.get(p).ok_or(Error::Protocol("sample position out of range"))?;
        errors += usize::from(lb != rb);
    }
    Ok(errors as f64 / positions.len() as f64)
}

/// Samples test positions and returns `(qber, positions)`. `remote_bits` is
/// the other party's full sifted string, of which only the sampled positions
/// are read.
pub fn estimate_qber<R: Rng + ?Sized>(
    local_bits: &[bool],
    remote_bits: &[bool],
    fraction: f64,
    rng: &mut R,
) -> Result<(f64, Vec<usize>)> {
    if local_bits.len() != remote_bits.len() {
        return Err(Error::Protocol("sifted strings differ in length"));
    }
    let positions = select_test_positions(local_bits.len(), fraction, rng)?;
    let sample: Vec<bool> = positions.iter().map(|&p| remote_bits[p]).collect();
    let q = qber_from_sample(local_bits, &positions, &sample)?;
    Ok((q, positions))
}
