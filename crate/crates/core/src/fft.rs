//! Thin wrappers around rustfft with the normalization and index
//! conventions used throughout the crate.
//!
//! Grids are always even-length powers of two. Frequency-ordered ("shifted")
//! arrays run monotonically from −span/2 to +span/2 − res with bin n/2 at
//! zero; FFT-ordered arrays use the usual DC-first layout. For even lengths
//! the shift and its inverse are the same half rotation.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::float::Real;

/// In-place forward transform, X_m = Σ_k x_k e^{−2πi m k / n} (unnormalized).
pub(crate) fn fft_forward<T: Real>(buf: &mut [Complex<T>]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// In-place inverse transform including the 1/n normalization,
/// x_k = (1/n) Σ_m X_m e^{+2πi m k / n}.
pub(crate) fn fft_inverse<T: Real>(buf: &mut [Complex<T>]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
    let scale = T::one() / T::from_usize(buf.len()).expect("grid length");
    for v in buf.iter_mut() {
        *v = v.scale(scale);
    }
}

/// Swap halves; maps FFT order to frequency order and back (even n).
pub(crate) fn half_rotate<T>(buf: &mut [T]) {
    debug_assert!(buf.len().is_multiple_of(2));
    let half = buf.len() / 2;
    buf.rotate_left(half);
}
