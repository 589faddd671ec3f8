//! Two-level optical Bloch equations driven by chirped, truncated sech
//! control pulses, and the detuning-averaged transfer efficiency η_T.
//!
//! All drive quantities are ordinary frequencies in Hz; the integrator
//! multiplies by 2π internally. The Bloch vector (u, v, w) starts in the
//! ground state (0, 0, −1) and carries no relaxation terms, so its norm is
//! conserved. Integrations at distinct detunings are independent and may run
//! concurrently.

use thiserror::Error;

use crate::float::{as_f64, r64, Real};
use crate::propagation::TimeGrid;
use crate::spectrum::AbsorptionProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlochError {
    #[error("{name} must be {constraint} (got {value})")]
    InvalidParams {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("time grid must resolve 1/omega_max and 1/chirp_range by >= 20 samples")]
    ResolutionTooCoarse,
    #[error("detuning weights are empty or sum to zero")]
    EmptyWeights,
    #[error("integrator failed: {reason}")]
    IntegratorFailure { reason: &'static str },
}

/// Chirped hyperbolic-secant control pulse:
/// Ω(t) = Ω_max sech(1.76 (t − t₀)/T), ν(t) = (δν/2) tanh(1.76 (t − t₀)/T),
/// hard-truncated to `truncation` seconds centered on t₀ (infinite for the
/// untruncated pulse).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechPulseParams<T> {
    /// Peak Rabi frequency in Hz.
    pub omega_max: T,
    /// FWHM duration of the pulse intensity, seconds.
    pub duration: T,
    /// Total chirp range δν in Hz.
    pub chirp_range: T,
    /// Total kept duration in seconds; `infinity` keeps the full tails.
    pub truncation: T,
    /// Center time t₀ in seconds.
    pub center_time: T,
}

/// The sech argument scale: intensity falls to half at 1.76 t/T = ±0.88.
const SECH_SCALE: f64 = 1.76;

impl<T: Real> SechPulseParams<T> {
    pub fn new(
        omega_max: T,
        duration: T,
        chirp_range: T,
        truncation: T,
        center_time: T,
    ) -> Result<Self, BlochError> {
        let p = Self {
            omega_max,
            duration,
            chirp_range,
            truncation,
            center_time,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), BlochError> {
        let bad = |name, constraint, value: T| {
            Err(BlochError::InvalidParams {
                name,
                constraint,
                value: as_f64(value),
            })
        };
        if !(self.omega_max >= T::zero()) {
            return bad("omega_max", ">= 0", self.omega_max);
        }
        if !(self.duration > T::zero()) {
            return bad("duration", "> 0", self.duration);
        }
        if !(self.chirp_range >= T::zero()) {
            return bad("chirp_range", ">= 0", self.chirp_range);
        }
        if !(self.truncation > T::zero()) {
            return bad("truncation", "> 0", self.truncation);
        }
        Ok(())
    }

    /// Pulse area ∫ 2πΩ(t) dt of the untruncated pulse, radians:
    /// π · 2πΩ_max · T / 1.76.
    pub fn untruncated_area(&self) -> T {
        let two_pi = r64::<T>(2.0) * T::PI();
        T::PI() * two_pi * self.omega_max * self.duration / r64(SECH_SCALE)
    }
}

/// Time-dependent drive seen by the two-level system.
pub trait ControlField<T: Real> {
    /// Rabi amplitude Ω(t), Hz.
    fn rabi(&self, t: T) -> T;
    /// Instantaneous frequency offset ν(t) of the drive, Hz.
    fn chirp(&self, t: T) -> T;
    /// Interval outside which the field vanishes.
    fn support(&self) -> (T, T);
}

impl<T: Real> ControlField<T> for SechPulseParams<T> {
    fn rabi(&self, t: T) -> T {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return T::zero();
        }
        let x = r64::<T>(SECH_SCALE) * (t - self.center_time) / self.duration;
        self.omega_max / x.cosh()
    }

    fn chirp(&self, t: T) -> T {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return T::zero();
        }
        let x = r64::<T>(SECH_SCALE) * (t - self.center_time) / self.duration;
        self.chirp_range / r64(2.0) * x.tanh()
    }

    fn support(&self) -> (T, T) {
        // An untruncated sech is cut where Ω < 1e-12 Ω_max.
        let natural = self.duration / r64(SECH_SCALE) * r64(28.3);
        let half = if self.truncation.is_finite() {
            (self.truncation / r64(2.0)).min(natural)
        } else {
            natural
        };
        (self.center_time - half, self.center_time + half)
    }
}

/// Constant-amplitude resonant drive over a fixed interval; a π pulse when
/// 2πΩ(t₂−t₁) = π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPulse<T> {
    pub omega: T,
    pub start: T,
    pub stop: T,
}

impl<T: Real> ControlField<T> for ConstantPulse<T> {
    fn rabi(&self, t: T) -> T {
        if t >= self.start && t <= self.stop {
            self.omega
        } else {
            T::zero()
        }
    }

    fn chirp(&self, _t: T) -> T {
        T::zero()
    }

    fn support(&self) -> (T, T) {
        (self.start, self.stop)
    }
}

/// Bloch vector components. Pure states keep u² + v² + w² = 1; no decay is
/// modeled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState<T> {
    pub u: T,
    pub v: T,
    pub w: T,
}

impl<T: Real> BlochState<T> {
    pub fn ground() -> Self {
        Self {
            u: T::zero(),
            v: T::zero(),
            w: -T::one(),
        }
    }

    pub fn norm(&self) -> T {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    /// Excited-state population after the pulse, p = (1 + w)/2.
    pub fn transfer_probability(&self) -> T {
        (T::one() + self.w) / r64(2.0)
    }
}

/// Sampled control waveform (Rabi amplitude and instantaneous detuning per
/// sample) for export.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlWaveform<T> {
    pub grid: TimeGrid<T>,
    pub rabi: Vec<T>,
    pub chirp: Vec<T>,
}

/// Sample a sech pulse onto a time grid, hard-truncated to its support.
pub fn sech_waveform<T: Real>(
    params: &SechPulseParams<T>,
    grid: &TimeGrid<T>,
) -> Result<ControlWaveform<T>, BlochError> {
    params.validate()?;
    let twenty = r64::<T>(20.0);
    if params.omega_max > T::zero() && grid.dt() * twenty > params.omega_max.recip() {
        return Err(BlochError::ResolutionTooCoarse);
    }
    if params.chirp_range > T::zero() && grid.dt() * twenty > params.chirp_range.recip() {
        return Err(BlochError::ResolutionTooCoarse);
    }
    let n = grid.n_points();
    let mut rabi = Vec::with_capacity(n);
    let mut chirp = Vec::with_capacity(n);
    for k in 0..n {
        let t = grid.time(k);
        rabi.push(params.rabi(t));
        chirp.push(params.chirp(t));
    }
    Ok(ControlWaveform {
        grid: *grid,
        rabi,
        chirp,
    })
}

/// Adaptive integrator tolerances. Defaults: relative 1e-9, absolute 1e-12
/// (floored at a few machine epsilons for narrower scalar types).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorOptions<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        Self {
            rel_tol: r64::<T>(1e-9).max(eps * r64(100.0)),
            abs_tol: r64::<T>(1e-12).max(eps),
            max_steps: 1_000_000,
        }
    }
}

// Dormand–Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type Vec3<T> = [T; 3];

fn bloch_rhs<T: Real>(field: &impl ControlField<T>, detuning: T, t: T, y: &Vec3<T>) -> Vec3<T> {
    let two_pi = r64::<T>(2.0) * T::PI();
    let delta = two_pi * (detuning - field.chirp(t));
    let omega = two_pi * field.rabi(t);
    [
        -delta * y[1],
        delta * y[0] + omega * y[2],
        -omega * y[1],
    ]
}

/// Integrate the Bloch equations
/// du/dt = −Δ'(t) v, dv/dt = Δ'(t) u + Ω(t) w, dw/dt = −Ω(t) v
/// with Δ'(t) = 2π(detuning − ν(t)) and Ω(t) = 2π rabi(t), from the ground
/// state over the pulse support. Dormand–Prince 5(4) with PI-free step
/// control.
pub fn integrate_bloch<T: Real>(
    detuning: T,
    field: &impl ControlField<T>,
    opts: &IntegratorOptions<T>,
) -> Result<BlochState<T>, BlochError> {
    let (t0, t1) = field.support();
    let mut y: Vec3<T> = [T::zero(), T::zero(), -T::one()];
    if !(t1 > t0) {
        return Ok(BlochState {
            u: y[0],
            v: y[1],
            w: y[2],
        });
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut h = span / r64(1000.0);
    let h_min = span * r64(1e-14);
    let mut k: [Vec3<T>; 7] = [[T::zero(); 3]; 7];
    let mut steps = 0usize;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(BlochError::IntegratorFailure {
                reason: "maximum step count exceeded",
            });
        }
        steps += 1;
        if t + h > t1 {
            h = t1 - t;
        }
        k[0] = bloch_rhs(field, detuning, t, &y);
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = r64::<T>(DP_A[stage - 1][j]);
                for i in 0..3 {
                    ys[i] += h * a * kj[i];
                }
            }
            k[stage] = bloch_rhs(field, detuning, t + r64::<T>(DP_C[stage]) * h, &ys);
        }
        let mut y5 = y;
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate() {
            let b5 = r64::<T>(DP_B5[j]);
            let b4 = r64::<T>(DP_B4[j]);
            for i in 0..3 {
                y5[i] += h * b5 * kj[i];
                y4[i] += h * b4 * kj[i];
            }
        }
        // RMS error against the mixed tolerance.
        let mut err_sq = T::zero();
        for i in 0..3 {
            let scale = opts.abs_tol + opts.rel_tol * y5[i].abs().max(y[i].abs());
            let e = (y5[i] - y4[i]) / scale;
            err_sq += e * e;
        }
        let err = (err_sq / r64(3.0)).sqrt();
        if err <= T::one() {
            t += h;
            y = y5;
        }
        let factor = if err == T::zero() {
            r64(5.0)
        } else {
            (r64::<T>(0.9) * err.powf(-r64::<T>(0.2)))
                .max(r64(0.2))
                .min(r64(5.0))
        };
        h *= factor;
        if h < h_min {
            return Err(BlochError::IntegratorFailure {
                reason: "step size underflow",
            });
        }
    }
    Ok(BlochState {
        u: y[0],
        v: y[1],
        w: y[2],
    })
}

/// Transfer probability p(δ) over a list of detunings, for curve export.
pub fn transfer_curve<T: Real>(
    params: &SechPulseParams<T>,
    detunings: &[T],
    opts: &IntegratorOptions<T>,
) -> Result<Vec<(T, T)>, BlochError> {
    detunings
        .iter()
        .map(|d| Ok((*d, integrate_bloch(*d, params, opts)?.transfer_probability())))
        .collect()
}

/// Above this many absorbing bins the transfer probability is integrated on
/// a subsampled detuning set and linearly interpolated; p(δ) is smooth, so
/// the interpolation error is far below the integrator tolerance.
const MAX_DIRECT_DETUNINGS: usize = 1024;

/// Detuning-averaged transfer efficiency η_T = Σ w(δ) p(δ) / Σ w(δ) over the
/// absorbing bins of the weight profile.
pub fn transfer_efficiency<T: Real>(
    params: &SechPulseParams<T>,
    weights: &AbsorptionProfile<T>,
    opts: &IntegratorOptions<T>,
) -> Result<T, BlochError> {
    params.validate()?;
    let bins: Vec<(T, T)> = weights
        .depth
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > T::zero())
        .map(|(j, d)| (weights.grid.freq(j), *d))
        .collect();
    if bins.is_empty() {
        return Err(BlochError::EmptyWeights);
    }
    let total_weight = bins.iter().fold(T::zero(), |acc, (_, w)| acc + *w);
    if !(total_weight > T::zero()) {
        return Err(BlochError::EmptyWeights);
    }
    if params.omega_max == T::zero() {
        return Ok(T::zero());
    }
    let weighted_sum = if bins.len() <= MAX_DIRECT_DETUNINGS {
        let mut acc = T::zero();
        for (f, w) in &bins {
            let p = integrate_bloch(*f, params, opts)?.transfer_probability();
            acc += *w * p;
        }
        acc
    } else {
        let lo = bins[0].0;
        let hi = bins[bins.len() - 1].0;
        let n_nodes = MAX_DIRECT_DETUNINGS + 1;
        let step = (hi - lo) / T::from_usize(n_nodes - 1).unwrap();
        let mut nodes = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let f = lo + step * T::from_usize(i).unwrap();
            nodes.push(integrate_bloch(f, params, opts)?.transfer_probability());
        }
        let mut acc = T::zero();
        for (f, w) in &bins {
            let x = ((*f - lo) / step).max(T::zero());
            let i = num_traits::ToPrimitive::to_usize(&x.floor())
                .unwrap_or(0)
                .min(n_nodes - 2);
            let frac = x - T::from_usize(i).unwrap();
            let p = nodes[i] + frac * (nodes[i + 1] - nodes[i]);
            acc += *w * p;
        }
        acc
    };
    Ok(weighted_sum / total_weight)
}

/// Uniform detuning weights over ±bandwidth/2, as an absorption profile on a
/// small internal grid.
pub fn uniform_weights<T: Real>(bandwidth: T) -> AbsorptionProfile<T> {
    let grid = crate::spectrum::FrequencyGrid::new(1 << 10, bandwidth * r64(4.0))
        .expect("weight grid");
    let half = bandwidth / r64(2.0);
    let depth = (0..grid.n_points())
        .map(|j| {
            if grid.freq(j).abs() <= half {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    AbsorptionProfile::new(grid, depth).expect("weight profile")
}

/// The control pulse used for all reference runs: Ω_max = 250 kHz, T = 5 µs,
/// δν = 1.2 MHz, truncated to 4 µs.
pub fn reference_sech_pulse<T: Real>(center_time: T) -> SechPulseParams<T> {
    SechPulseParams {
        omega_max: r64(250e3),
        duration: r64(5e-6),
        chirp_range: r64(1.2e6),
        truncation: r64(4e-6),
        center_time,
    }
}
