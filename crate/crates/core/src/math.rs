//! Thin wrappers over `libm` so the rest of the crate reads like std code.

pub(crate) const LIMIT_THRESHOLD: f64 = 1e-12;

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// `x^e` by binary exponentiation; exact for the small integer powers used here.
pub(crate) fn powi(mut x: f64, mut e: u32) -> f64 {
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= x;
        }
        x *= x;
        e >>= 1;
    }
    acc
}

/// `(e^{a t} - 1) / a`, continued by its limit `t` when `|a|` is negligible.
pub(crate) fn exp_growth(a: f64, t: f64) -> f64 {
    if a.abs() < LIMIT_THRESHOLD {
        t
    } else {
        expm1(a * t) / a
    }
}

pub(crate) fn checked_pow(base: usize, e: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..e {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}
