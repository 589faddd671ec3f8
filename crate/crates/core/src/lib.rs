//! Deterministic simulator of atomic-frequency-comb (AFC) optical memories.
//!
//! The crate covers the closed-form echo efficiency theory (single-pass and
//! impedance-matched cavity), brute-force spectral pulse propagation through
//! causal Kramers–Kronig transfer functions, an asymmetric Fabry–Perot
//! cavity model, Bloch-equation integration of chirped sech control pulses,
//! and composition of the full spin-wave efficiency budget.
//!
//! Everything is generic over the scalar type via [`float::Real`]
//! (`f32`/`f64`); the `*64` aliases at the crate root fix `f64` for common
//! use.

// Validation deliberately writes `!(x >= limit)` so that NaN inputs fail the
// check instead of slipping through a plain `x < limit`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bloch;
pub mod cavity;
pub mod csv;
mod fft;
pub mod float;
pub mod propagation;
pub mod scenario;
pub mod spectrum;

pub use float::Real;

/// `f64` aliases of the main domain types.
pub type CombParams64 = analytic::CombParams<f64>;
pub type SpinParams64 = analytic::SpinParams<f64>;
pub type MaterialParams64 = analytic::MaterialParams<f64>;
pub type EfficiencyBudget64 = analytic::EfficiencyBudget<f64>;
pub type FrequencyGrid64 = spectrum::FrequencyGrid<f64>;
pub type AbsorptionProfile64 = spectrum::AbsorptionProfile<f64>;
pub type ComplexResponse64 = spectrum::ComplexResponse<f64>;
pub type TimeGrid64 = propagation::TimeGrid<f64>;
pub type PulseWaveform64 = propagation::PulseWaveform<f64>;
pub type CavityParams64 = cavity::CavityParams<f64>;
pub type SechPulseParams64 = bloch::SechPulseParams<f64>;
pub type BlochState64 = bloch::BlochState<f64>;
pub type SpinWaveTimeline64 = scenario::SpinWaveTimeline<f64>;
