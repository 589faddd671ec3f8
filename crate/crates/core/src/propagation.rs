//! Time-domain pulse propagation through a complex transfer function, and
//! echo-efficiency extraction. This is the brute-force counterpart of the
//! closed-form theory in [`crate::analytic`].
//!
//! Conventions: a waveform sample at time t with spectrum Ẽ(f) satisfies
//! E(t) = ∫ Ẽ(f) e^{+2πi f t} df, so a causal response delays pulses toward
//! later times. Efficiencies are energy ratios (integrals of |E|²), which is
//! the unambiguous simulator analogue of pulse-area measurements on detected
//! intensity traces.

use num_complex::Complex;
use thiserror::Error;

use crate::fft::{fft_forward, fft_inverse, half_rotate};
use crate::float::{as_f64, r64, Real};
use crate::spectrum::{ComplexResponse, FrequencyGrid, SpectrumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagationError {
    #[error("time grid must have a power-of-two point count >= 1024 (got {n})")]
    InvalidGridSize { n: usize },
    #[error("time step must be positive (got {dt})")]
    InvalidTimeStep { dt: f64 },
    #[error("pulse FWHM {fwhm} s must be at least 10 time steps ({dt} s each)")]
    FwhmTooShort { fwhm: f64, dt: f64 },
    #[error("pulse does not decay below 1e-6 of its peak at the grid edges")]
    PulseDoesNotFit,
    #[error("waveform and response grids are not conjugate")]
    GridMismatch,
    #[error("echo window [{start} s, {end} s] extends outside the grid")]
    WindowOutsideGrid { start: f64, end: f64 },
    #[error("echo window must be at least 3 input FWHMs wide (got {window} s)")]
    WindowTooNarrow { window: f64 },
    #[error(
        "echo window starting at {window_start} s overlaps the transmitted input \
         (guard ends at {guard_end} s)"
    )]
    WindowOverlapsInput { window_start: f64, guard_end: f64 },
    #[error("no echo found above numerical noise after {after} s")]
    NoEchoFound { after: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Uniform time grid of n points with step dt, conjugate to a
/// [`FrequencyGrid`] of the same length via dt = 1/span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    n_points: usize,
    dt: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(n_points: usize, dt: T) -> Result<Self, PropagationError> {
        if !n_points.is_power_of_two() || n_points < 1024 {
            return Err(PropagationError::InvalidGridSize { n: n_points });
        }
        if !(dt > T::zero()) {
            return Err(PropagationError::InvalidTimeStep { dt: as_f64(dt) });
        }
        Ok(Self { n_points, dt })
    }

    /// The time grid conjugate to a frequency grid.
    pub fn conjugate_of(grid: &FrequencyGrid<T>) -> Self {
        Self {
            n_points: grid.n_points(),
            dt: grid.span().recip(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn duration(&self) -> T {
        self.dt * T::from_usize(self.n_points).unwrap()
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * T::from_usize(k).unwrap()
    }

    /// The frequency grid this time grid is conjugate to.
    pub fn frequency_grid(&self) -> FrequencyGrid<T> {
        FrequencyGrid::new(self.n_points, self.dt.recip()).expect("conjugate grid")
    }

    fn conjugate_to(&self, grid: &FrequencyGrid<T>) -> bool {
        self.n_points == grid.n_points()
            && (self.dt * grid.span() - T::one()).abs() < r64(1e-9)
    }
}

/// Complex field envelope on a time grid. The carrier detuning (relative to
/// the comb center) is baked into the envelope as a phase ramp and recorded
/// here for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseWaveform<T> {
    pub grid: TimeGrid<T>,
    pub envelope: Vec<Complex<T>>,
    pub carrier_detuning: T,
}

impl<T: Real> PulseWaveform<T> {
    /// Total energy, Σ|E|² dt.
    pub fn energy(&self) -> T {
        self.envelope
            .iter()
            .fold(T::zero(), |acc, e| acc + e.norm_sqr())
            * self.grid.dt()
    }

    /// Energy within [t_min, t_max].
    pub fn energy_in(&self, t_min: T, t_max: T) -> T {
        let mut acc = T::zero();
        for (k, e) in self.envelope.iter().enumerate() {
            let t = self.grid.time(k);
            if t >= t_min && t <= t_max {
                acc += e.norm_sqr();
            }
        }
        acc * self.grid.dt()
    }

    /// Time of the envelope magnitude maximum.
    pub fn peak_time(&self) -> T {
        let mut best = 0usize;
        let mut best_v = T::zero();
        for (k, e) in self.envelope.iter().enumerate() {
            let v = e.norm_sqr();
            if v > best_v {
                best_v = v;
                best = k;
            }
        }
        self.grid.time(best)
    }

    /// FWHM of the intensity |E(t)|², from linear interpolation of the
    /// half-maximum crossings nearest the peak.
    pub fn fwhm_intensity(&self) -> T {
        let intensity: Vec<T> = self.envelope.iter().map(|e| e.norm_sqr()).collect();
        let (mut peak, mut peak_v) = (0usize, T::zero());
        for (k, v) in intensity.iter().enumerate() {
            if *v > peak_v {
                peak_v = *v;
                peak = k;
            }
        }
        if peak_v == T::zero() {
            return T::zero();
        }
        let half = peak_v / r64(2.0);
        let dt = self.grid.dt();
        let mut left = T::zero();
        for k in (0..peak).rev() {
            if intensity[k] <= half {
                let frac = (half - intensity[k]) / (intensity[k + 1] - intensity[k]);
                left = self.grid.time(k) + frac * dt;
                break;
            }
        }
        let mut right = self.grid.duration();
        for k in peak + 1..intensity.len() {
            if intensity[k] <= half {
                let frac = (intensity[k - 1] - half) / (intensity[k - 1] - intensity[k]);
                right = self.grid.time(k - 1) + frac * dt;
                break;
            }
        }
        right - left
    }

    /// Spectrum on the conjugate frequency grid (frequency-ordered).
    pub fn spectrum(&self) -> Vec<Complex<T>> {
        let mut buf = self.envelope.clone();
        fft_forward(&mut buf);
        half_rotate(&mut buf);
        let dt = self.grid.dt();
        for v in buf.iter_mut() {
            *v = v.scale(dt);
        }
        buf
    }

    /// Scale the envelope by a complex factor.
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            envelope: self.envelope.iter().map(|e| e * factor).collect(),
            carrier_detuning: self.carrier_detuning,
        }
    }
}

/// Unit-energy Gaussian pulse with the given intensity FWHM, center time and
/// carrier detuning. The spectral intensity FWHM is (2 ln 2 / π)/fwhm.
pub fn gaussian_pulse<T: Real>(
    fwhm: T,
    center: T,
    detuning: T,
    grid: &TimeGrid<T>,
) -> Result<PulseWaveform<T>, PropagationError> {
    let ten = r64::<T>(10.0);
    if fwhm < ten * grid.dt() {
        return Err(PropagationError::FwhmTooShort {
            fwhm: as_f64(fwhm),
            dt: as_f64(grid.dt()),
        });
    }
    let two_ln2 = r64::<T>(2.0) * T::LN_2();
    let edge_decay = |t: T| {
        let x = (t - center) / fwhm;
        (-two_ln2 * x * x).exp()
    };
    let last = grid.time(grid.n_points() - 1);
    if edge_decay(T::zero()) > r64(1e-6) || edge_decay(last) > r64(1e-6) {
        return Err(PropagationError::PulseDoesNotFit);
    }
    let two_pi = r64::<T>(2.0) * T::PI();
    let mut envelope: Vec<Complex<T>> = (0..grid.n_points())
        .map(|k| {
            let t = grid.time(k);
            let amp = edge_decay(t);
            let phase = two_pi * detuning * (t - center);
            Complex::from_polar(amp, phase)
        })
        .collect();
    // Normalize the sampled energy exactly.
    let energy = envelope
        .iter()
        .fold(T::zero(), |acc, e| acc + e.norm_sqr())
        * grid.dt();
    let scale = energy.sqrt().recip();
    for e in envelope.iter_mut() {
        *e = e.scale(scale);
    }
    Ok(PulseWaveform {
        grid: *grid,
        envelope,
        carrier_detuning: detuning,
    })
}

/// Propagate a waveform through a transfer function: the output spectrum is
/// H(f) times the input spectrum. Linear and energy-non-increasing for any
/// passive response.
pub fn propagate<T: Real>(
    pulse: &PulseWaveform<T>,
    response: &ComplexResponse<T>,
) -> Result<PulseWaveform<T>, PropagationError> {
    if !pulse.grid.conjugate_to(&response.grid) {
        return Err(PropagationError::GridMismatch);
    }
    let mut buf = pulse.envelope.clone();
    fft_forward(&mut buf);
    half_rotate(&mut buf);
    for (v, h) in buf.iter_mut().zip(&response.transfer) {
        *v *= *h;
    }
    half_rotate(&mut buf);
    fft_inverse(&mut buf);
    Ok(PulseWaveform {
        grid: pulse.grid,
        envelope: buf,
        carrier_detuning: pulse.carrier_detuning,
    })
}

/// Time-domain impulse response of a transfer function under the crate's
/// synthesis convention: the response to a unit impulse at t = 0. Negative
/// times wrap to the upper half of the grid.
pub fn impulse_response<T: Real>(response: &ComplexResponse<T>) -> PulseWaveform<T> {
    let grid = TimeGrid::conjugate_of(&response.grid);
    let mut buf = response.transfer.clone();
    half_rotate(&mut buf);
    fft_inverse(&mut buf);
    let scale = grid.dt().recip();
    for v in buf.iter_mut() {
        *v = v.scale(scale);
    }
    PulseWaveform {
        grid,
        envelope: buf,
        carrier_detuning: T::zero(),
    }
}

/// Default guard after the input center inside which output energy is
/// attributed to the transmitted pulse rather than an echo, in units of the
/// input FWHM.
pub const INPUT_GUARD_FWHM: f64 = 3.0;

/// Energy in a window around `echo_time` divided by the input pulse energy.
///
/// The window must be at least 3 input FWHMs wide, lie inside the grid, and
/// must not reach into the transmitted input: `guard` seconds after the
/// input peak (pass [`INPUT_GUARD_FWHM`] input widths by default).
pub fn echo_efficiency<T: Real>(
    out: &PulseWaveform<T>,
    input: &PulseWaveform<T>,
    echo_time: T,
    window: T,
    guard: T,
) -> Result<T, PropagationError> {
    let fwhm = input.fwhm_intensity();
    if window < r64::<T>(3.0) * fwhm {
        return Err(PropagationError::WindowTooNarrow {
            window: as_f64(window),
        });
    }
    let half = window / r64(2.0);
    let (start, end) = (echo_time - half, echo_time + half);
    if start < T::zero() || end > out.grid.duration() {
        return Err(PropagationError::WindowOutsideGrid {
            start: as_f64(start),
            end: as_f64(end),
        });
    }
    let guard_end = input.peak_time() + guard;
    if start < guard_end {
        return Err(PropagationError::WindowOverlapsInput {
            window_start: as_f64(start),
            guard_end: as_f64(guard_end),
        });
    }
    Ok(out.energy_in(start, end) / input.energy())
}

/// Time of the first echo peak: the envelope maximum after
/// `input_center + guard`. Fails when nothing in that region rises above
/// 1e-8 of the global output peak.
pub fn first_echo_peak_time<T: Real>(
    out: &PulseWaveform<T>,
    input_center: T,
    guard: T,
) -> Result<T, PropagationError> {
    let after = input_center + guard;
    let mut global = T::zero();
    for e in &out.envelope {
        global = global.max(e.norm_sqr());
    }
    let mut best: Option<usize> = None;
    let mut best_v = T::zero();
    for (k, e) in out.envelope.iter().enumerate() {
        if out.grid.time(k) <= after {
            continue;
        }
        let v = e.norm_sqr();
        if v > best_v {
            best_v = v;
            best = Some(k);
        }
    }
    let noise_floor = global * r64(1e-12);
    match best {
        Some(k) if best_v > noise_floor => {
            // Parabolic vertex through the three bins around the maximum
            // estimates the underlying envelope peak to a fraction of a bin.
            let t = out.grid.time(k);
            if k == 0 || k == out.envelope.len() - 1 {
                return Ok(t);
            }
            let ym = out.envelope[k - 1].norm_sqr();
            let y0 = out.envelope[k].norm_sqr();
            let yp = out.envelope[k + 1].norm_sqr();
            let denom = ym - y0 - y0 + yp;
            if denom < T::zero() {
                let half = r64::<T>(0.5);
                let offset = (half * (ym - yp) / denom).max(-half).min(half);
                Ok(t + offset * out.grid.dt())
            } else {
                Ok(t)
            }
        }
        _ => Err(PropagationError::NoEchoFound {
            after: as_f64(after),
        }),
    }
}
