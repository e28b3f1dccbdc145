//! Radix-2 transforms between coefficients and values on the roots of unity.

use alloc::vec;
use alloc::vec::Vec;

use crate::float;
use crate::{Complex64, Error, Result, TAU};

/// In-place iterative radix-2 DFT, `x_k ← Σ_j x_j·e^{sign·2πijk/m}`.
/// Twiddles are evaluated directly rather than by repeated multiplication.
fn transform(buf: &mut [Complex64], sign: f64) {
    let m = buf.len();
    debug_assert!(m.is_power_of_two());
    if m <= 1 {
        return;
    }
    let bits = m.trailing_zeros();
    for i in 0..m {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }
    let twiddles: Vec<Complex64> = (0..m / 2)
        .map(|k| float::cis(sign * TAU * k as f64 / m as f64))
        .collect();
    let mut len = 2;
    while len <= m {
        let half = len / 2;
        let stride = m / len;
        for start in (0..m).step_by(len) {
            for j in 0..half {
                let w = twiddles[j * stride];
                let u = buf[start + j];
                let v = buf[start + j + half] * w;
                buf[start + j] = u + v;
                buf[start + j + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Values of `Σ_j c_j z^j` at `z_k = e^{2πik/m}`, `k < m`. Requires
/// `coeffs.len() ≤ m` and `m` a power of two.
pub fn evaluate_on_roots(coeffs: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    if !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    if coeffs.len() > m {
        return Err(Error::GridTooSmall {
            size: m,
            degree: coeffs.len().saturating_sub(1),
            required: coeffs.len(),
        });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..coeffs.len()].copy_from_slice(coeffs);
    transform(&mut buf, 1.0);
    Ok(buf)
}

/// Inverse of [`evaluate_on_roots`]: the `m` coefficients of the
/// interpolating polynomial of degree `< m`.
pub fn interpolate_from_roots(values: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = values.len();
    if !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    let mut buf = values.to_vec();
    transform(&mut buf, -1.0);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|x| *x *= scale);
    Ok(buf)
}
