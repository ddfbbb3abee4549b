//! Small numeric helpers shared across modules.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Periodic Hann window; sums to a constant at 50% overlap.
pub(crate) fn hann_periodic(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * libm::cos(2.0 * PI * n as f64 / len as f64))
        .collect()
}

/// Symmetric Hann window used for analysis frames.
pub(crate) fn hann_symmetric(len: usize) -> Vec<f64> {
    if len == 1 {
        return alloc::vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.5 - 0.5 * libm::cos(2.0 * PI * n as f64 / denom))
        .collect()
}

/// Modified Bessel function of the first kind, order zero (power series).
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        libm::sin(px) / px
    }
}

/// All-pass frequency warping: maps a linear frequency (rad) onto the
/// mel-like axis defined by `alpha`.
pub(crate) fn warp(omega: f64, alpha: f64) -> f64 {
    omega + 2.0 * libm::atan2(alpha * libm::sin(omega), 1.0 - alpha * libm::cos(omega))
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// Population variance.
pub(crate) fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}
