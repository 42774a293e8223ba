use crate::{Error, Result};

/// `H2(x) = −x log2 x − (1−x) log2(1−x)` with `0 · log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain("binary entropy argument must lie in [0, 1]"));
    }
    let term = |p: f64| if p > 0.0 { -p * libm::log2(p) } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Asymptotic secret fraction `max(0, 1 − (1 + f) H2(Q))`.
pub fn key_fraction(qber: f64, ec_efficiency: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&qber) {
        return Err(Error::Domain("qber must lie in [0, 0.5]"));
    }
    if !(ec_efficiency >= 1.0) || !ec_efficiency.is_finite() {
        return Err(Error::Domain("error-correction efficiency must be at least 1"));
    }
    Ok((1.0 - (1.0 + ec_efficiency) * binary_entropy(qber)?).max(0.0))
}

/// `⌊n · key_fraction(Q, f)⌋`.
pub fn secret_key_length(sifted_after_test: usize, qber: f64, ec_efficiency: f64) -> Result<usize> {
    let r = key_fraction(qber, ec_efficiency)?;
    Ok(libm::floor(sifted_after_test as f64 * r) as usize)
}

/// Error rate at which the secret fraction reaches zero, by bisection on
/// `[0, 0.5]`.
pub fn zero_rate_qber(ec_efficiency: f64) -> Result<f64> {
    let g = |q: f64| key_fraction_unclamped(q, ec_efficiency);
    if !(ec_efficiency >= 1.0) {
        return Err(Error::Domain("error-correction efficiency must be at least 1"));
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn key_fraction_unclamped(qber: f64, f: f64) -> f64 {
    1.0 - (1.0 + f) * binary_entropy(qber).unwrap_or(1.0)
}
