//! Composed experiments: two-level echo runs (single-pass and cavity),
//! spin-wave budget assembly with a synthetic output trace, and cavity
//! design optimization.
//!
//! Scenario runs are independent jobs with deterministic outputs; a sweep
//! executor may run them concurrently as long as each result is written by a
//! single writer.

use num_complex::Complex;
use thiserror::Error;

use crate::analytic::{
    self, AnalyticError, CombParams, EfficiencyBudget, SpinParams,
};
use crate::bloch::{
    transfer_efficiency, uniform_weights, BlochError, IntegratorOptions, SechPulseParams,
    ControlField,
};
use crate::cavity::{cavity_echo_efficiency, CavityError, CavityParams};
use crate::float::{as_f64, r64, Real};
use crate::propagation::{
    first_echo_peak_time, gaussian_pulse, propagate, PropagationError, PulseWaveform, TimeGrid,
};
use crate::spectrum::{
    kramers_kronig_response, square_comb, FrequencyGrid, SpectrumError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error("timeline invalid: {reason} ({value} s)")]
    InvalidTimeline { reason: &'static str, value: f64 },
    #[error("comb spacing and timeline AFC delay disagree: 1/spacing = {delay_from_comb} s, timeline delay = {delay} s")]
    InconsistentDelay { delay_from_comb: f64, delay: f64 },
    #[error("{name} must be {constraint} (got {value})")]
    InvalidSetup {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
}

/// Frequency-grid defaults for comb studies: 2^18 points over 80 MHz gives
/// at least 8 samples per tooth down to Δ = 40 kHz at F = 5, with the guard
/// band intact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub n_points: usize,
    pub span: T,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            n_points: 1 << 18,
            span: r64(80.0e6),
        }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn build(&self) -> Result<FrequencyGrid<T>, SpectrumError> {
        FrequencyGrid::new(self.n_points, self.span)
    }
}

/// Input pulse description for echo runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec<T> {
    /// Intensity FWHM, seconds.
    pub fwhm: T,
    /// Center time, seconds.
    pub center: T,
    /// Carrier detuning from the comb center, Hz.
    pub detuning: T,
}

/// Echo-extraction window settings in units of the input FWHM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec<T> {
    /// Window width; the default 4 FWHM captures over 99.9% of a
    /// transform-limited echo while excluding neighbors for F >= 3.
    pub window_fwhm: T,
    /// Guard after the input center attributing energy to the transmitted
    /// pulse.
    pub guard_fwhm: T,
}

impl<T: Real> Default for WindowSpec<T> {
    fn default() -> Self {
        Self {
            window_fwhm: r64(4.0),
            guard_fwhm: r64(3.0),
        }
    }
}

/// A full two-level echo experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelSetup<T> {
    pub comb: CombParams<T>,
    pub pulse: PulseSpec<T>,
    pub cavity: Option<CavityParams<T>>,
    pub grid: GridSpec<T>,
    pub window: WindowSpec<T>,
}

/// Result of a two-level run: simulated efficiency next to the closed-form
/// prediction, echo timing, and the traces that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelReport<T> {
    pub efficiency: T,
    pub analytic_prediction: T,
    pub relative_deviation: T,
    /// Programmed delay 1/Δ.
    pub echo_delay: T,
    /// Measured delay of the first echo peak after the input center.
    pub echo_peak_delay: T,
    /// False when a validity precondition (loss regime, pulse bandwidth
    /// inside the cavity line) was not met; values are still computed.
    pub in_regime: bool,
    pub input: PulseWaveform<T>,
    pub output: PulseWaveform<T>,
}

/// Run a two-level AFC echo experiment, single-pass or cavity-enhanced.
pub fn run_two_level<T: Real>(setup: &TwoLevelSetup<T>) -> Result<TwoLevelReport<T>, ScenarioError> {
    setup.comb.validate()?;
    let fgrid = setup.grid.build()?;
    let tgrid = TimeGrid::conjugate_of(&fgrid);
    let profile = square_comb(&setup.comb, &fgrid)?;
    let medium = kramers_kronig_response(&profile)?;
    let pulse = gaussian_pulse(setup.pulse.fwhm, setup.pulse.center, setup.pulse.detuning, &tgrid)?;
    let delay = setup.comb.echo_delay();
    let window = setup.window.window_fwhm * setup.pulse.fwhm;
    let guard = setup.window.guard_fwhm * setup.pulse.fwhm;

    let d_tilde = setup.comb.avg_depth();
    let deph = analytic::eta_deph_square(setup.comb.finesse)?;

    let (efficiency, output, analytic_prediction, in_regime) = match &setup.cavity {
        None => {
            let out = propagate(&pulse, &medium)?;
            let eta = crate::propagation::echo_efficiency(
                &out,
                &pulse,
                setup.pulse.center + delay,
                window,
                guard,
            )?;
            let pred = analytic::eta_single_pass(d_tilde, setup.comb.finesse)?;
            (eta, out, pred, true)
        }
        Some(cav) => {
            let echo = cavity_echo_efficiency(cav, &medium, &pulse, delay, window, guard)?;
            let depth_factor = analytic::eta_cavity_finite_depth(d_tilde)?;
            let loss = analytic::eta_cavity_loss(d_tilde, cav.epsilon)?;
            let pred = deph * depth_factor * loss.value;
            let out = crate::cavity::reflect_pulse(cav, &medium, &pulse)?;
            (echo.efficiency, out, pred, echo.in_regime && loss.in_regime)
        }
    };
    let peak = first_echo_peak_time(&output, setup.pulse.center, guard)?;
    let relative_deviation = if analytic_prediction > T::zero() {
        (efficiency - analytic_prediction) / analytic_prediction
    } else {
        T::zero()
    };
    Ok(TwoLevelReport {
        efficiency,
        analytic_prediction,
        relative_deviation,
        echo_delay: delay,
        echo_peak_delay: peak - setup.pulse.center,
        in_regime,
        input: pulse,
        output,
    })
}

/// Event times of a spin-wave run. The output leaves at
/// t₀ + 1/Δ + T_sw with T_sw = t₂ − t₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinWaveTimeline<T> {
    pub input_center: T,
    pub control_1: T,
    pub control_2: T,
    pub afc_delay: T,
}

impl<T: Real> SpinWaveTimeline<T> {
    pub fn spin_wave_time(&self) -> T {
        self.control_2 - self.control_1
    }

    pub fn output_time(&self) -> T {
        self.input_center + self.afc_delay + self.spin_wave_time()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.afc_delay > T::zero()) {
            return Err(ScenarioError::InvalidTimeline {
                reason: "AFC delay must be positive",
                value: as_f64(self.afc_delay),
            });
        }
        if !(self.control_1 > self.input_center) {
            return Err(ScenarioError::InvalidTimeline {
                reason: "first control pulse must come after the input",
                value: as_f64(self.control_1),
            });
        }
        if !(self.control_1 < self.input_center + self.afc_delay) {
            return Err(ScenarioError::InvalidTimeline {
                reason: "first control pulse must precede the echo at 1/spacing",
                value: as_f64(self.control_1),
            });
        }
        if !(self.control_2 > self.control_1) {
            return Err(ScenarioError::InvalidTimeline {
                reason: "second control pulse must follow the first",
                value: as_f64(self.control_2),
            });
        }
        Ok(())
    }
}

/// Spin-wave experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinWaveSetup<T> {
    pub timeline: SpinWaveTimeline<T>,
    pub comb: CombParams<T>,
    pub control: SechPulseParams<T>,
    pub spin: SpinParams<T>,
    /// Width of the uniform detuning window used to average the control
    /// transfer, in Hz (typically the input-pulse bandwidth).
    pub transfer_bandwidth: T,
    /// Scalar spatial-mode overlap between control and storage beams.
    pub overlap: T,
    /// Output pulses stretch by this factor relative to the input.
    pub output_stretch: T,
    /// Intensity FWHM of the input pulse, for the synthetic trace and (when
    /// η_2L is simulated) the echo run.
    pub input_fwhm: T,
    /// Measured two-level efficiency; when absent it is simulated.
    pub measured_eta_2l: Option<T>,
    /// Measured/effective control transfer; when absent the Bloch
    /// integrator supplies it.
    pub measured_eta_t: Option<T>,
    pub cavity: Option<CavityParams<T>>,
    pub grid: GridSpec<T>,
    pub integrator: IntegratorOptions<T>,
}

/// Budget plus the synthetic time trace of a spin-wave run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinWaveReport<T> {
    pub budget: EfficiencyBudget<T>,
    /// η_2L · η_T² · overlap: the total extrapolated to zero storage time.
    pub extrapolated_zero_tsw: T,
    pub timeline: SpinWaveTimeline<T>,
    pub trace: PulseWaveform<T>,
}

/// Assemble the spin-wave efficiency budget and a presentation trace.
///
/// The trace is a sum of placed envelopes (input, scattered-control markers
/// at fixed amplitude, output scaled to the total efficiency), not a coupled
/// three-level field simulation.
pub fn run_spin_wave<T: Real>(setup: &SpinWaveSetup<T>) -> Result<SpinWaveReport<T>, ScenarioError> {
    setup.timeline.validate()?;
    setup.comb.validate()?;
    let delay_from_comb = setup.comb.echo_delay();
    let mismatch = (delay_from_comb - setup.timeline.afc_delay).abs();
    if mismatch > delay_from_comb * r64(1e-6) {
        return Err(ScenarioError::InconsistentDelay {
            delay_from_comb: as_f64(delay_from_comb),
            delay: as_f64(setup.timeline.afc_delay),
        });
    }
    if !(setup.overlap >= T::zero() && setup.overlap <= T::one()) {
        return Err(ScenarioError::InvalidSetup {
            name: "overlap",
            constraint: "in [0, 1]",
            value: as_f64(setup.overlap),
        });
    }

    let (eta_2l, eta_2l_simulated) = match setup.measured_eta_2l {
        Some(v) => (v, false),
        None => {
            let report = run_two_level(&TwoLevelSetup {
                comb: setup.comb,
                pulse: PulseSpec {
                    fwhm: setup.input_fwhm,
                    center: setup.timeline.input_center.max(r64::<T>(4.0) * setup.input_fwhm),
                    detuning: T::zero(),
                },
                cavity: setup.cavity,
                grid: setup.grid,
                window: WindowSpec::default(),
            })?;
            (report.efficiency, true)
        }
    };

    let (eta_t, eta_t_simulated) = match setup.measured_eta_t {
        Some(v) => (v, false),
        None => {
            if !(setup.transfer_bandwidth > T::zero()) {
                return Err(ScenarioError::InvalidSetup {
                    name: "transfer_bandwidth",
                    constraint: "> 0",
                    value: as_f64(setup.transfer_bandwidth),
                });
            }
            let weights = uniform_weights(setup.transfer_bandwidth);
            (
                transfer_efficiency(&setup.control, &weights, &setup.integrator)?,
                true,
            )
        }
    };

    let eta_sw = analytic::eta_spin_dephasing(&setup.spin, setup.timeline.spin_wave_time())?;
    let mut budget = analytic::total_budget(eta_2l, eta_t, eta_sw, setup.overlap)?;
    budget.eta_2l_simulated = eta_2l_simulated;
    budget.eta_t_simulated = eta_t_simulated;
    let extrapolated = eta_2l * eta_t * eta_t * setup.overlap;

    let trace = synthetic_trace(setup, budget.eta_total)?;
    Ok(SpinWaveReport {
        budget,
        extrapolated_zero_tsw: extrapolated,
        timeline: setup.timeline,
        trace,
    })
}

/// Amplitude given to the scattered-control markers in synthetic traces
/// (arbitrary units; control pulses are far stronger than the signal in
/// reality and are clipped for presentation).
const CONTROL_MARKER_AMPLITUDE: f64 = 0.5;

fn synthetic_trace<T: Real>(
    setup: &SpinWaveSetup<T>,
    eta_total: T,
) -> Result<PulseWaveform<T>, ScenarioError> {
    let tl = &setup.timeline;
    let duration = tl.output_time() + r64::<T>(8.0) * setup.input_fwhm;
    let n = 4096usize;
    let grid = TimeGrid::new(n, duration / T::from_usize(n).unwrap())?;
    let mut env = vec![Complex::new(T::zero(), T::zero()); n];
    let two_ln2 = r64::<T>(2.0) * T::LN_2();

    // Unit-peak Gaussian of the given intensity FWHM, scaled to an energy.
    let place_gaussian = |center: T, fwhm: T, energy: T, env: &mut Vec<Complex<T>>| {
        let norm = energy / (fwhm * (T::PI() / (r64::<T>(8.0) * T::LN_2())).sqrt());
        let amp = norm.sqrt();
        for (k, sample) in env.iter_mut().enumerate() {
            let x = (grid.time(k) - center) / fwhm;
            *sample += Complex::new(amp * (-two_ln2 * x * x).exp(), T::zero());
        }
    };
    place_gaussian(tl.input_center, setup.input_fwhm, T::one(), &mut env);
    place_gaussian(
        tl.output_time(),
        setup.input_fwhm * setup.output_stretch,
        eta_total,
        &mut env,
    );
    let marker = r64::<T>(CONTROL_MARKER_AMPLITUDE);
    for center in [tl.control_1, tl.control_2] {
        let shifted = SechPulseParams {
            center_time: center,
            ..setup.control
        };
        for (k, sample) in env.iter_mut().enumerate() {
            let t = grid.time(k);
            if setup.control.omega_max > T::zero() {
                let a = marker * shifted.rabi(t) / setup.control.omega_max;
                *sample += Complex::new(a, T::zero());
            }
        }
    }
    Ok(PulseWaveform {
        grid,
        envelope: env,
        carrier_detuning: T::zero(),
    })
}

/// One evaluated point of a cavity/finesse design scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint<T> {
    pub finesse: T,
    pub d_tilde: T,
    /// Matched front-mirror reflectivity (cavity mode only).
    pub r1: Option<T>,
    pub eta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignScan<T> {
    pub points: Vec<DesignPoint<T>>,
    pub best: DesignPoint<T>,
    /// True when the optimum sits on the finesse constraint rather than at
    /// an interior maximum (e.g. lossless cavities improve monotonically
    /// with finesse).
    pub boundary: bool,
}

/// Scan the comb finesse and report the efficiency-maximizing design.
///
/// With `epsilon = Some(ε)` each point is an impedance-matched cavity
/// (R₁ = (1−ε) e^{−2d̃}) scored by the full cavity ceiling; with `None` the
/// score is the single-pass efficiency.
pub fn optimize_cavity_design<T: Real>(
    peak_depth: T,
    epsilon: Option<T>,
    max_finesse: T,
    steps: usize,
) -> Result<DesignScan<T>, ScenarioError> {
    if !(peak_depth > T::zero()) {
        return Err(ScenarioError::InvalidSetup {
            name: "peak_depth",
            constraint: "> 0",
            value: as_f64(peak_depth),
        });
    }
    if !(max_finesse > T::one()) || steps < 2 {
        return Err(ScenarioError::InvalidSetup {
            name: "max_finesse",
            constraint: "> 1 with at least 2 scan steps",
            value: as_f64(max_finesse),
        });
    }
    let step = (max_finesse - T::one()) / T::from_usize(steps - 1).unwrap();
    let mut points = Vec::with_capacity(steps);
    let mut best_idx = 0usize;
    for i in 0..steps {
        let finesse = T::one() + step * T::from_usize(i).unwrap();
        let d_tilde = peak_depth / finesse;
        let (eta, r1) = match epsilon {
            Some(eps) => {
                let ceiling = analytic::eta_cavity_ceiling(peak_depth, finesse, eps)?;
                let r1 = (T::one() - eps) * analytic::impedance_match_reflectivity(d_tilde)?;
                (ceiling.value, Some(r1))
            }
            None => (analytic::eta_single_pass(d_tilde, finesse)?, None),
        };
        points.push(DesignPoint {
            finesse,
            d_tilde,
            r1,
            eta,
        });
        if points[i].eta > points[best_idx].eta {
            best_idx = i;
        }
    }
    let boundary = best_idx == steps - 1 || best_idx == 0;
    Ok(DesignScan {
        best: points[best_idx],
        points,
        boundary,
    })
}
