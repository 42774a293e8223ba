//! Deterministic random streams.
//!
//! Every simulation step owns a family of ChaCha8 streams keyed by
//! `(seed, step index, purpose)`. Streams never overlap, so a step's output is
//! independent of the order in which steps execute, and adding or removing
//! consumers of one purpose (e.g. dark counts) leaves every other purpose's
//! draws untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// What a stream is used for. The discriminant is the low nibble of the
/// ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    PairTimes = 0,
    Outcomes = 1,
    LocalDetection = 2,
    RemoteDetection = 3,
    LocalDark = 4,
    RemoteDark = 5,
    Protocol = 6,
}

const PURPOSES: u64 = 16;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counter-based stream for one step and purpose.
pub fn stream(seed: u64, step: u64, purpose: Purpose) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step.wrapping_mul(PURPOSES).wrapping_add(purpose as u64));
    rng
}

/// Exponential variate with the given rate (rate > 0).
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    // 1 - u lies in (0, 1], so the log is finite.
    let u: f64 = rng.random();
    -libm::log(1.0 - u) / rate
}
