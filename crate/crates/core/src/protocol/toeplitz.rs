use alloc::vec::Vec;

use crate::{Error, Result};

fn pack(bits: &[bool]) -> Vec<u64> {
    let mut words = alloc::vec![0u64; bits.len().div_ceil(64) + 1];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// XORs `seed[start .. start + 64·out.len()]` into `out`.
fn xor_window(out: &mut [u64], seed: &[u64], start: usize) {
    let (word, shift) = (start / 64, start % 64);
    for (k, o) in out.iter_mut().enumerate() {
        let lo = seed.get(word + k).copied().unwrap_or(0);
        let chunk = if shift == 0 {
            lo
        } else {
            let hi = seed.get(word + k + 1).copied().unwrap_or(0);
            (lo >> shift) | (hi << (64 - shift))
        };
        *o ^= chunk;
    }
}

/// Multiplies `input` by the Toeplitz matrix `T[i][j] = seed[i − j + n − 1]`
/// over GF(2), where `n = input.len()`, producing `out_len` bits.
///
/// Row `i` of `T` restricted to column `j` reads the seed at offset
/// `i + (n − 1 − j)`, so the product is the XOR of the seed windows
/// `seed[n−1−j ..][..out_len]` over the set input bits `j`. Words are packed
/// 64 bits at a time.
pub fn toeplitz_hash(input: &[bool], seed: &[bool], out_len: usize) -> Result<Vec<bool>> {
    let n = input.len();
    if out_len > n {
        return Err(Error::Domain("toeplitz output longer than input"));
    }
    if out_len == 0 {
        return Ok(Vec::new());
    }
    if seed.len() != n + out_len - 1 {
        return Err(Error::Domain("toeplitz seed length must be input + output - 1"));
    }
    let seed_words = pack(seed);
    let mut acc = alloc::vec![0u64; out_len.div_ceil(64)];
    for (j, &x) in input.iter().enumerate() {
        if x {
            xor_window(&mut acc, &seed_words, n - 1 - j);
        }
    }
    Ok((0..out_len).map(|i| acc[i / 64] >> (i % 64) & 1 == 1).collect())
}
