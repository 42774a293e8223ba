use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use rand::Rng;

use crate::polarization::AnalyzerAngle;
use crate::{Error, Result};

/// Measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// H/V, analyzer at 0.
    Rectilinear,
    /// D/A, analyzer at π/4.
    Diagonal,
}

impl Basis {
    pub fn angle(self) -> AnalyzerAngle {
        match self {
            Basis::Rectilinear => AnalyzerAngle::from_radians_unchecked(0.0),
            Basis::Diagonal => AnalyzerAngle::from_radians_unchecked(FRAC_PI_4),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Uniform basis choice.
pub fn choose_basis<R: Rng + ?Sized>(rng: &mut R) -> Basis {
    if rng.random::<bool>() {
        Basis::Diagonal
    } else {
        Basis::Rectilinear
    }
}

/// One party's measurement of one coincidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRecord {
    pub index: usize,
    pub basis: Basis,
    /// `false` for the transmitted port, `true` for reflected.
    pub bit: bool,
    /// Seconds.
    pub time: f64,
}

/// What one party keeps after basis reconciliation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SiftResult {
    /// Record indices whose bases matched, ascending.
    pub kept_indices: Vec<usize>,
    /// This party's bits at `kept_indices`.
    pub bits: Vec<bool>,
    pub sifted_count: usize,
}

impl SiftResult {
    /// Keeps the records at `kept` (ascending record indices).
    pub fn from_kept(records: &[RawRecord], kept: &[usize]) -> Result<Self> {
        let mut bits = Vec::with_capacity(kept.len());
        let mut cursor = 0;
        for &idx in kept {
            while cursor < records.len() && records[cursor].index < idx {
                cursor += 1;
            }
            match records.get(cursor) {
                Some(r) if r.index == idx => bits.push(r.bit),
                _ => return Err(Error::Protocol("kept index not present in records")),
            }
        }
        Ok(SiftResult { kept_indices: kept.to_vec(), bits, sifted_count: kept.len() })
    }
}

/// Keeps exactly the records whose basis matches the other party's.
pub fn sift(local: &[RawRecord], remote_bases: &[Basis]) -> Result<SiftResult> {
    if local.len() != remote_bases.len() {
        return Err(Error::Protocol("basis list length differs from record count"));
    }
    if local.windows(2).any(|w| w[0].index >= w[1].index) {
        return Err(Error::Protocol("record indices must be unique and ascending"));
    }
    let (kept_indices, bits): (Vec<usize>, Vec<bool>) =
        local.iter().zip(remote_bases).filter(|(r, &b)| r.basis == b).map(|(r, _)| (r.index, r.bit)).unzip();
    let sifted_count = kept_indices.len();
    Ok(SiftResult { kept_indices, bits, sifted_count })
}
