//! Asymmetric impedance-matched Fabry–Perot cavity enclosing the comb
//! medium: reflection transfer function, cavity echo efficiency and
//! dispersion-narrowed linewidth.
//!
//! The medium appears squared in the round trip (two passes through the
//! crystal per bounce) and the intracavity loss is a single lumped element
//! per round trip. The round-trip phase is referenced so that a resonance
//! sits at the comb center when `detuning_offset` is zero; at that resonance
//! an impedance-matched absorbing cavity extinguishes the reflection, while
//! an empty lossless cavity with a perfect end mirror reflects everything.

use num_complex::Complex;
use thiserror::Error;

use crate::float::{as_f64, r64, Real};
use crate::propagation::{
    echo_efficiency, propagate, PropagationError, PulseWaveform,
};
use crate::spectrum::{ComplexResponse, SpectrumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CavityError {
    #[error("{name} must be {constraint} (got {value})")]
    InvalidParams {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error(
        "grid span {span} Hz too small to resolve the cavity; need >= {required} Hz \
         (twice the empty-cavity linewidth)"
    )]
    GridSpanInsufficient { span: f64, required: f64 },
    #[error("no reflection resonance found within the probe span")]
    ResonanceNotFound,
    #[error("reflection dip contrast {contrast} is below 5%; linewidth not measurable")]
    DipTooShallow { contrast: f64 },
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Mirror and geometry parameters of the memory cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams<T> {
    /// Front (coupling) mirror power reflectivity.
    pub r1: T,
    /// Back mirror power reflectivity.
    pub r2: T,
    /// Round-trip intracavity power loss, excluding absorption by the comb.
    pub epsilon: T,
    /// Free spectral range in Hz.
    pub fsr: T,
    /// Cavity resonance offset from the comb center in Hz.
    pub detuning_offset: T,
}

impl<T: Real> CavityParams<T> {
    pub fn new(r1: T, r2: T, epsilon: T, fsr: T, detuning_offset: T) -> Result<Self, CavityError> {
        let p = Self {
            r1,
            r2,
            epsilon,
            fsr,
            detuning_offset,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CavityError> {
        let checks: [(&'static str, &'static str, bool, T); 4] = [
            ("r1", "in (0, 1]", self.r1 > T::zero() && self.r1 <= T::one(), self.r1),
            ("r2", "in (0, 1]", self.r2 > T::zero() && self.r2 <= T::one(), self.r2),
            (
                "epsilon",
                "in [0, 1)",
                self.epsilon >= T::zero() && self.epsilon < T::one(),
                self.epsilon,
            ),
            ("fsr", "> 0", self.fsr > T::zero(), self.fsr),
        ];
        for (name, constraint, ok, value) in checks {
            if !ok {
                return Err(CavityError::InvalidParams {
                    name,
                    constraint,
                    value: as_f64(value),
                });
            }
        }
        Ok(())
    }

    /// Empty-cavity finesse π (R₁R₂(1−ε))^{1/4} / (1 − √(R₁R₂(1−ε))).
    pub fn empty_finesse(&self) -> T {
        let rt = (self.r1 * self.r2 * (T::one() - self.epsilon)).sqrt();
        T::PI() * rt.sqrt() / (T::one() - rt)
    }

    /// Empty-cavity linewidth estimate FSR/finesse.
    pub fn empty_linewidth(&self) -> T {
        self.fsr / self.empty_finesse()
    }
}

/// Reflection coefficient of the cavity around the medium:
///
/// r(ω) = (√R₁ − √R₂ √(1−ε) H²(ω) e^{−iθ}) / (1 − √(R₁R₂) √(1−ε) H²(ω) e^{−iθ}),
/// θ(ω) = 2π (ω − detuning_offset)/FSR.
///
/// The round-trip factor carries e^{−iθ} so that the circulating field is
/// delayed (causal) under the crate's e^{+2πift} synthesis convention.
pub fn reflection_response<T: Real>(
    cav: &CavityParams<T>,
    medium: &ComplexResponse<T>,
) -> Result<ComplexResponse<T>, CavityError> {
    cav.validate()?;
    // Low-finesse degenerate cavities (linewidth beyond FSR/2) add no sharp
    // feature, so only resonant cavities constrain the span.
    let linewidth = cav.empty_linewidth();
    if linewidth < cav.fsr / r64(2.0) {
        let required = linewidth * r64(2.0);
        if medium.grid.span() < required {
            return Err(CavityError::GridSpanInsufficient {
                span: as_f64(medium.grid.span()),
                required: as_f64(required),
            });
        }
    }
    let sqrt_r1 = cav.r1.sqrt();
    let back = (cav.r2 * (T::one() - cav.epsilon)).sqrt();
    let two_pi = r64::<T>(2.0) * T::PI();
    let transfer = medium
        .transfer
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let theta = two_pi * (medium.grid.freq(j) - cav.detuning_offset) / cav.fsr;
            let round_trip = h * h * Complex::from_polar(back, -theta);
            (Complex::new(sqrt_r1, T::zero()) - round_trip)
                / (Complex::new(T::one(), T::zero()) - round_trip.scale(sqrt_r1))
        })
        .collect();
    Ok(ComplexResponse {
        grid: medium.grid,
        transfer,
    })
}

/// Echo efficiency of the cavity-enhanced memory: propagate the pulse
/// through the reflection response and take the energy in a window of
/// `window` seconds centered `echo_delay` after the input peak, over the
/// input energy.
///
/// `in_regime` is false when the pulse spectrum is not comfortably inside
/// the cavity resonance (spectral FWHM above half the empty-cavity
/// linewidth); dispersion from the comb narrows the usable band further, so
/// out-of-regime results underestimate the matched efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityEcho<T> {
    pub efficiency: T,
    pub in_regime: bool,
}

pub fn cavity_echo_efficiency<T: Real>(
    cav: &CavityParams<T>,
    medium: &ComplexResponse<T>,
    pulse: &PulseWaveform<T>,
    echo_delay: T,
    window: T,
    guard: T,
) -> Result<CavityEcho<T>, CavityError> {
    let response = reflection_response(cav, medium)?;
    let out = propagate(pulse, &response)?;
    let echo_time = pulse.peak_time() + echo_delay;
    let efficiency = echo_efficiency(&out, pulse, echo_time, window, guard)?;
    let spectral_fwhm = r64::<T>(2.0) * T::LN_2() / (T::PI() * pulse.fwhm_intensity());
    let in_regime = spectral_fwhm <= cav.empty_linewidth() / r64(2.0);
    Ok(CavityEcho {
        efficiency,
        in_regime,
    })
}

/// Full reflected waveform of a cavity run, for trace export.
pub fn reflect_pulse<T: Real>(
    cav: &CavityParams<T>,
    medium: &ComplexResponse<T>,
    pulse: &PulseWaveform<T>,
) -> Result<PulseWaveform<T>, CavityError> {
    let response = reflection_response(cav, medium)?;
    Ok(propagate(pulse, &response)?)
}

/// FWHM of the reflection dip nearest the comb center, measured between the
/// half-contrast crossings walking outward from the minimum. Reports failure
/// when the dip contrast is below 5% or a crossing is missing inside the
/// probe span.
pub fn cavity_linewidth<T: Real>(
    cav: &CavityParams<T>,
    medium: &ComplexResponse<T>,
    probe_span: T,
) -> Result<T, CavityError> {
    let response = reflection_response(cav, medium)?;
    let grid = &response.grid;
    let half_probe = probe_span / r64(2.0);
    let lo = grid.nearest_bin(cav.detuning_offset - half_probe);
    let hi = grid.nearest_bin(cav.detuning_offset + half_probe);
    if hi <= lo + 2 {
        return Err(CavityError::ResonanceNotFound);
    }
    let abs2: Vec<T> = response.transfer[lo..=hi]
        .iter()
        .map(|r| r.norm_sqr())
        .collect();
    let (mut min_k, mut min_v) = (0usize, T::infinity());
    let mut max_v = T::zero();
    for (k, v) in abs2.iter().enumerate() {
        if *v < min_v {
            min_v = *v;
            min_k = k;
        }
        max_v = max_v.max(*v);
    }
    let contrast = max_v - min_v;
    if contrast < r64(0.05) {
        return Err(CavityError::DipTooShallow {
            contrast: as_f64(contrast),
        });
    }
    if min_k == 0 || min_k == abs2.len() - 1 {
        return Err(CavityError::ResonanceNotFound);
    }
    let half_level = min_v + contrast / r64(2.0);
    let res = grid.resolution();
    let cross = |iter: &mut dyn Iterator<Item = usize>| -> Option<T> {
        let mut prev = min_k;
        for k in iter {
            if abs2[k] >= half_level {
                let frac = (half_level - abs2[prev]) / (abs2[k] - abs2[prev]);
                let prev_f = T::from_usize(prev).unwrap();
                let k_f = T::from_usize(k).unwrap();
                return Some((prev_f + frac * (k_f - prev_f)) * res);
            }
            prev = k;
        }
        None
    };
    let right = cross(&mut (min_k + 1..abs2.len()));
    let left = cross(&mut (0..min_k).rev());
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l).abs()),
        _ => Err(CavityError::ResonanceNotFound),
    }
}
