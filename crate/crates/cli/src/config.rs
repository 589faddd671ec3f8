//! Configuration model: TOML sections mirroring the simulator's parameter
//! types, with explicit units in the key names. Unknown keys are rejected;
//! validation errors name the offending key and constraint.

use afcsim_core::analytic::{CombParams, SpinParams, ToothShape};
use afcsim_core::bloch::{IntegratorOptions, SechPulseParams};
use afcsim_core::cavity::CavityParams;
use afcsim_core::scenario::{
    GridSpec, PulseSpec, SpinWaveSetup, SpinWaveTimeline, TwoLevelSetup, WindowSpec,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("missing section [{0}] required by this scenario")]
    MissingSection(&'static str),
    #[error("invalid value for {key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unknown sweep parameter {parameter:?} for target {target:?}")]
    UnknownSweepParameter { parameter: String, target: String },
}

fn invalid(key: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Comb,
    Echo,
    Cavity,
    Bloch,
    Spinwave,
    Sweep,
    Design,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Comb => "comb",
            Scenario::Echo => "echo",
            Scenario::Cavity => "cavity",
            Scenario::Bloch => "bloch",
            Scenario::Spinwave => "spinwave",
            Scenario::Sweep => "sweep",
            Scenario::Design => "design",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombSection {
    pub peak_depth: f64,
    pub tooth_spacing_khz: f64,
    /// Defaults to the optimal finesse for the peak depth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finesse: Option<f64>,
    /// Defaults to 5 MHz.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_mhz: Option<f64>,
    /// "square" (default) or "gaussian".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tooth_shape: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    /// Defaults to one eighth of the echo delay.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fwhm_us: Option<f64>,
    /// Defaults to four pulse widths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_khz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub r1: f64,
    pub r2: f64,
    pub epsilon: f64,
    pub fsr_mhz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_offset_khz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_fwhm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_fwhm: Option<f64>,
}

/// Medium inside the cavity for cavity-scenario studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    /// "empty", "uniform", "window" or "comb".
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_depth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width_mhz: Option<f64>,
    /// Span probed for the resonance dip; defaults to a quarter of the grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_span_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub omega_max_khz: f64,
    pub duration_us: f64,
    pub chirp_mhz: f64,
    /// Total kept duration; omitted means untruncated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSection {
    pub gamma_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineSection {
    pub input_center_us: f64,
    pub control1_us: f64,
    pub control2_us: f64,
    pub afc_delay_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_eta_2l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_eta_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_stretch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer_bandwidth_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_fwhm_us: Option<f64>,
}

/// Detuning curve export for the bloch scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TransferSection {
    /// Averaging window for the reported mean transfer; defaults to 0.5 MHz.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_span_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub peak_depth: f64,
    /// Present: impedance-matched cavity design. Absent: single-pass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_finesse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Scenario evaluated at each point: "echo", "cavity" or "spinwave".
    pub target: String,
    pub parameter: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comb: Option<CombSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<SpinSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeline: Option<TimelineSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorSection>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Serialize back to TOML; parses to an identical `RunConfig`.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Eagerly validate every referenced parameter against the simulator's
    /// preconditions, without running anything.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.scenario {
            Scenario::Comb => {
                self.comb_params()?;
                self.grid_spec(None)?;
            }
            Scenario::Echo => {
                self.echo_setup(None)?;
            }
            Scenario::Cavity => {
                self.cavity_params()?;
                self.medium_section()?;
                self.grid_spec(None)?;
            }
            Scenario::Bloch => {
                self.control_params()?;
            }
            Scenario::Spinwave => {
                self.spin_wave_setup(None)?;
            }
            Scenario::Design => {
                self.design_section()?;
            }
            Scenario::Sweep => {
                let sweep = self.sweep_section()?;
                crate::sweep::validate(self, sweep)?;
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self, n_override: Option<usize>) -> Result<GridSpec<f64>, ConfigError> {
        let mut spec = GridSpec::default();
        if let Some(grid) = &self.grid {
            if let Some(n) = grid.n_points {
                spec.n_points = n;
            }
            if let Some(span) = grid.span_mhz {
                if span <= 0.0 {
                    return Err(invalid("grid.span_mhz", "must be > 0"));
                }
                spec.span = span * 1e6;
            }
        }
        if let Some(n) = n_override {
            spec.n_points = n;
        }
        if !spec.n_points.is_power_of_two() || spec.n_points < 1024 {
            return Err(invalid(
                "grid.n_points",
                "must be a power of two >= 1024",
            ));
        }
        Ok(spec)
    }

    pub fn comb_params(&self) -> Result<CombParams<f64>, ConfigError> {
        let comb = self.comb.as_ref().ok_or(ConfigError::MissingSection("comb"))?;
        let shape = match comb.tooth_shape.as_deref() {
            None | Some("square") => ToothShape::Square,
            Some("gaussian") => ToothShape::Gaussian,
            Some(other) => {
                return Err(invalid(
                    "comb.tooth_shape",
                    format!("must be \"square\" or \"gaussian\", got {other:?}"),
                ))
            }
        };
        if comb.peak_depth <= 0.0 {
            return Err(invalid("comb.peak_depth", "must be > 0"));
        }
        let finesse = match comb.finesse {
            Some(f) => {
                if f < 1.0 {
                    return Err(invalid("comb.finesse", "finesse >= 1"));
                }
                f
            }
            None => afcsim_core::analytic::optimal_finesse(comb.peak_depth)
                .map_err(|e| invalid("comb.peak_depth", e))?,
        };
        if comb.tooth_spacing_khz <= 0.0 {
            return Err(invalid("comb.tooth_spacing_khz", "must be > 0"));
        }
        let bandwidth = comb.bandwidth_mhz.unwrap_or(5.0);
        CombParams::new(
            comb.peak_depth,
            comb.tooth_spacing_khz * 1e3,
            finesse,
            shape,
            bandwidth * 1e6,
        )
        .map_err(|e| invalid("comb", e))
    }

    pub fn cavity_params(&self) -> Result<CavityParams<f64>, ConfigError> {
        let cav = self
            .cavity
            .as_ref()
            .ok_or(ConfigError::MissingSection("cavity"))?;
        CavityParams::new(
            cav.r1,
            cav.r2,
            cav.epsilon,
            cav.fsr_mhz * 1e6,
            cav.detuning_offset_khz.unwrap_or(0.0) * 1e3,
        )
        .map_err(|e| invalid("cavity", e))
    }

    pub fn medium_section(&self) -> Result<&MediumSection, ConfigError> {
        let medium = self
            .medium
            .as_ref()
            .ok_or(ConfigError::MissingSection("medium"))?;
        match medium.kind.as_str() {
            "empty" => {}
            "uniform" => {
                let d = medium
                    .depth
                    .ok_or_else(|| invalid("medium.depth", "required for kind = \"uniform\""))?;
                if d < 0.0 {
                    return Err(invalid("medium.depth", "must be >= 0"));
                }
            }
            "window" => {
                let bg = medium.background_depth.ok_or_else(|| {
                    invalid("medium.background_depth", "required for kind = \"window\"")
                })?;
                if bg < 0.0 {
                    return Err(invalid("medium.background_depth", "must be >= 0"));
                }
                let w = medium
                    .width_mhz
                    .ok_or_else(|| invalid("medium.width_mhz", "required for kind = \"window\""))?;
                if w < 0.0 {
                    return Err(invalid("medium.width_mhz", "must be >= 0"));
                }
            }
            "comb" => {
                self.comb_params()?;
            }
            other => {
                return Err(invalid(
                    "medium.kind",
                    format!("must be \"empty\", \"uniform\", \"window\" or \"comb\", got {other:?}"),
                ))
            }
        }
        Ok(medium)
    }

    pub fn window_spec(&self) -> WindowSpec<f64> {
        let mut spec = WindowSpec::default();
        if let Some(window) = &self.window {
            if let Some(w) = window.window_fwhm {
                spec.window_fwhm = w;
            }
            if let Some(g) = window.guard_fwhm {
                spec.guard_fwhm = g;
            }
        }
        spec
    }

    pub fn pulse_spec(&self, comb: &CombParams<f64>) -> Result<PulseSpec<f64>, ConfigError> {
        let section = self.pulse.clone().unwrap_or_default();
        let fwhm = match section.fwhm_us {
            Some(v) => {
                if v <= 0.0 {
                    return Err(invalid("pulse.fwhm_us", "must be > 0"));
                }
                v * 1e-6
            }
            None => comb.echo_delay() / 8.0,
        };
        let center = match section.center_us {
            Some(v) => {
                if v <= 0.0 {
                    return Err(invalid("pulse.center_us", "must be > 0"));
                }
                v * 1e-6
            }
            None => 4.0 * fwhm,
        };
        Ok(PulseSpec {
            fwhm,
            center,
            detuning: section.detuning_khz.unwrap_or(0.0) * 1e3,
        })
    }

    pub fn echo_setup(&self, n_override: Option<usize>) -> Result<TwoLevelSetup<f64>, ConfigError> {
        let comb = self.comb_params()?;
        let pulse = self.pulse_spec(&comb)?;
        let cavity = match &self.cavity {
            Some(_) => Some(self.cavity_params()?),
            None => None,
        };
        Ok(TwoLevelSetup {
            comb,
            pulse,
            cavity,
            grid: self.grid_spec(n_override)?,
            window: self.window_spec(),
        })
    }

    pub fn control_params(&self) -> Result<SechPulseParams<f64>, ConfigError> {
        let control = self
            .control
            .as_ref()
            .ok_or(ConfigError::MissingSection("control"))?;
        let truncation = match control.truncation_us {
            Some(v) => {
                if v <= 0.0 {
                    return Err(invalid("control.truncation_us", "must be > 0"));
                }
                v * 1e-6
            }
            None => f64::INFINITY,
        };
        SechPulseParams::new(
            control.omega_max_khz * 1e3,
            control.duration_us * 1e-6,
            control.chirp_mhz * 1e6,
            truncation,
            0.0,
        )
        .map_err(|e| invalid("control", e))
    }

    pub fn spin_params(&self) -> Result<SpinParams<f64>, ConfigError> {
        let spin = self.spin.as_ref().ok_or(ConfigError::MissingSection("spin"))?;
        SpinParams::new(spin.gamma_khz * 1e3).map_err(|e| invalid("spin.gamma_khz", e))
    }

    pub fn integrator_options(&self) -> Result<IntegratorOptions<f64>, ConfigError> {
        let mut opts = IntegratorOptions::default();
        if let Some(section) = &self.integrator {
            if let Some(rel) = section.rel_tol {
                if rel <= 0.0 {
                    return Err(invalid("integrator.rel_tol", "must be > 0"));
                }
                opts.rel_tol = rel;
            }
            if let Some(abs) = section.abs_tol {
                if abs <= 0.0 {
                    return Err(invalid("integrator.abs_tol", "must be > 0"));
                }
                opts.abs_tol = abs;
            }
        }
        Ok(opts)
    }

    pub fn spin_wave_setup(
        &self,
        n_override: Option<usize>,
    ) -> Result<SpinWaveSetup<f64>, ConfigError> {
        let timeline_section = self
            .timeline
            .as_ref()
            .ok_or(ConfigError::MissingSection("timeline"))?;
        let timeline = SpinWaveTimeline {
            input_center: timeline_section.input_center_us * 1e-6,
            control_1: timeline_section.control1_us * 1e-6,
            control_2: timeline_section.control2_us * 1e-6,
            afc_delay: timeline_section.afc_delay_us * 1e-6,
        };
        timeline.validate().map_err(|e| invalid("timeline", e))?;
        let comb = self.comb_params()?;
        let mut control = self.control_params()?;
        control.center_time = timeline.control_1;
        let spin = self.spin_params()?;
        let budget = self.budget.clone().unwrap_or_default();
        for (key, value) in [
            ("budget.measured_eta_2l", budget.measured_eta_2l),
            ("budget.measured_eta_t", budget.measured_eta_t),
            ("budget.overlap", budget.overlap),
        ] {
            if let Some(v) = value {
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid(key, "must lie in [0, 1]"));
                }
            }
        }
        let setup = SpinWaveSetup {
            timeline,
            comb,
            control,
            spin,
            transfer_bandwidth: budget.transfer_bandwidth_mhz.unwrap_or(0.5) * 1e6,
            overlap: budget.overlap.unwrap_or(1.0),
            output_stretch: budget.output_stretch.unwrap_or(1.2),
            input_fwhm: budget.input_fwhm_us.unwrap_or(1.0) * 1e-6,
            measured_eta_2l: budget.measured_eta_2l,
            measured_eta_t: budget.measured_eta_t,
            cavity: match &self.cavity {
                Some(_) => Some(self.cavity_params()?),
                None => None,
            },
            grid: self.grid_spec(n_override)?,
            integrator: self.integrator_options()?,
        };
        Ok(setup)
    }

    pub fn design_section(&self) -> Result<&DesignSection, ConfigError> {
        let design = self
            .design
            .as_ref()
            .ok_or(ConfigError::MissingSection("design"))?;
        if design.peak_depth <= 0.0 {
            return Err(invalid("design.peak_depth", "must be > 0"));
        }
        if let Some(eps) = design.epsilon {
            if !(0.0..1.0).contains(&eps) {
                return Err(invalid("design.epsilon", "must lie in [0, 1)"));
            }
        }
        if let Some(max_f) = design.max_finesse {
            if max_f <= 1.0 {
                return Err(invalid("design.max_finesse", "must be > 1"));
            }
        }
        if let Some(steps) = design.steps {
            if steps < 2 {
                return Err(invalid("design.steps", "must be >= 2"));
            }
        }
        Ok(design)
    }

    pub fn sweep_section(&self) -> Result<&SweepSection, ConfigError> {
        self.sweep.as_ref().ok_or(ConfigError::MissingSection("sweep"))
    }

    pub fn transfer_section(&self) -> TransferSection {
        self.transfer.clone().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_echo_config_is_valid() {
        let config = RunConfig::from_toml(
            r#"
            scenario = "echo"

            [comb]
            peak_depth = 0.8
            tooth_spacing_khz = 250.0
            "#,
        )
        .unwrap();
        let setup = config.echo_setup(None).unwrap();
        assert!((setup.comb.finesse - 2.175).abs() < 0.01);
        assert!((setup.pulse.fwhm - 0.5e-6).abs() < 1e-12);
    }

    #[test]
    fn finesse_below_one_is_named_in_the_error() {
        let err = RunConfig::from_toml(
            r#"
            scenario = "echo"

            [comb]
            peak_depth = 0.8
            tooth_spacing_khz = 250.0
            finesse = 0.5
            "#,
        )
        .unwrap_err();
        let message = err.to_string();
        assert!(message.contains("comb.finesse"), "{message}");
        assert!(message.contains(">= 1"), "{message}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml(
            r#"
            scenario = "echo"
            typo_key = 1.0

            [comb]
            peak_depth = 0.8
            tooth_spacing_khz = 250.0
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn round_trips_through_toml() {
        let text = r#"
            scenario = "spinwave"

            [comb]
            peak_depth = 0.8
            tooth_spacing_khz = 100.0
            finesse = 5.0

            [timeline]
            input_center_us = 1.0
            control1_us = 6.0
            control2_us = 11.3
            afc_delay_us = 10.0

            [control]
            omega_max_khz = 250.0
            duration_us = 5.0
            chirp_mhz = 1.2
            truncation_us = 4.0

            [spin]
            gamma_khz = 26.5

            [budget]
            measured_eta_2l = 0.28
            measured_eta_t = 0.7
        "#;
        let config = RunConfig::from_toml(text).unwrap();
        let echoed = config.to_toml();
        let back = RunConfig::from_toml(&echoed).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn missing_sections_are_reported() {
        let err = RunConfig::from_toml("scenario = \"spinwave\"").unwrap_err();
        assert!(err.to_string().contains("timeline"), "{err}");
    }
}
