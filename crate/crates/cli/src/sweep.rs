//! One- and two-parameter sweeps over echo, cavity and spin-wave runs,
//! emitting one CSV row per parameter tuple in specification order.

use std::fmt::Write as _;

use afcsim_core::cavity::{cavity_linewidth, reflection_response, CavityError};
use afcsim_core::csv;
use afcsim_core::scenario::{run_spin_wave, run_two_level};
use afcsim_core::spectrum::ComplexResponse;

use crate::config::{ConfigError, RunConfig, Scenario, SweepSection};
use crate::runner::{build_medium, RunOptions};
use crate::CliError;

pub const MAX_POINTS: usize = 10_000;

fn invalid(key: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn axis_values(
    section: &SweepSection,
    primary: bool,
) -> Result<Vec<f64>, ConfigError> {
    let (key, values, start, stop, steps) = if primary {
        (
            "sweep.values",
            section.values.clone(),
            section.start,
            section.stop,
            section.steps,
        )
    } else {
        ("sweep.values2", section.values2.clone(), None, None, None)
    };
    let values = match (values, start, stop, steps) {
        (Some(v), None, None, None) => v,
        (None, Some(a), Some(b), Some(n)) => {
            if n < 1 {
                return Err(invalid("sweep.steps", "must be >= 1"));
            }
            (0..n)
                .map(|i| {
                    if n == 1 {
                        a
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    }
                })
                .collect()
        }
        _ => {
            return Err(invalid(
                key,
                "specify either a values list or start/stop/steps",
            ))
        }
    };
    if values.is_empty() {
        return Err(invalid(key, "sweep range is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid(key, "sweep values must be finite"));
    }
    Ok(values)
}

/// The sweepable parameters per target scenario.
fn parameter_allowed(target: &str, parameter: &str) -> bool {
    let echo = [
        "inv_delta_us",
        "tooth_spacing_khz",
        "finesse",
        "peak_depth",
        "pulse_fwhm_us",
        "r1",
        "epsilon",
    ];
    let cavity = ["r1", "epsilon", "depth"];
    let spinwave = ["t_sw_us"];
    match target {
        "echo" => echo.contains(&parameter),
        "cavity" => cavity.contains(&parameter),
        "spinwave" => spinwave.contains(&parameter),
        _ => false,
    }
}

fn apply_parameter(config: &mut RunConfig, parameter: &str, value: f64) -> Result<(), ConfigError> {
    match parameter {
        "inv_delta_us" => {
            if value <= 0.0 {
                return Err(invalid("sweep.values", "inv_delta_us must be > 0"));
            }
            let comb = config
                .comb
                .as_mut()
                .ok_or(ConfigError::MissingSection("comb"))?;
            comb.tooth_spacing_khz = 1.0e3 / value;
        }
        "tooth_spacing_khz" => {
            config
                .comb
                .as_mut()
                .ok_or(ConfigError::MissingSection("comb"))?
                .tooth_spacing_khz = value;
        }
        "finesse" => {
            config
                .comb
                .as_mut()
                .ok_or(ConfigError::MissingSection("comb"))?
                .finesse = Some(value);
        }
        "peak_depth" => {
            config
                .comb
                .as_mut()
                .ok_or(ConfigError::MissingSection("comb"))?
                .peak_depth = value;
        }
        "pulse_fwhm_us" => {
            config.pulse.get_or_insert_with(Default::default).fwhm_us = Some(value);
        }
        "r1" => {
            config
                .cavity
                .as_mut()
                .ok_or(ConfigError::MissingSection("cavity"))?
                .r1 = value;
        }
        "epsilon" => {
            config
                .cavity
                .as_mut()
                .ok_or(ConfigError::MissingSection("cavity"))?
                .epsilon = value;
        }
        "depth" => {
            config
                .medium
                .as_mut()
                .ok_or(ConfigError::MissingSection("medium"))?
                .depth = Some(value);
        }
        "t_sw_us" => {
            let timeline = config
                .timeline
                .as_mut()
                .ok_or(ConfigError::MissingSection("timeline"))?;
            timeline.control2_us = timeline.control1_us + value;
        }
        _ => unreachable!("validated"),
    }
    Ok(())
}

pub fn validate(config: &RunConfig, sweep: &SweepSection) -> Result<(), ConfigError> {
    let target = sweep.target.as_str();
    if !matches!(target, "echo" | "cavity" | "spinwave") {
        return Err(invalid(
            "sweep.target",
            format!("must be \"echo\", \"cavity\" or \"spinwave\", got {target:?}"),
        ));
    }
    if !parameter_allowed(target, &sweep.parameter) {
        return Err(ConfigError::UnknownSweepParameter {
            parameter: sweep.parameter.clone(),
            target: target.to_string(),
        });
    }
    let primary = axis_values(sweep, true)?;
    let secondary = match &sweep.parameter2 {
        Some(p2) => {
            if !parameter_allowed(target, p2) {
                return Err(ConfigError::UnknownSweepParameter {
                    parameter: p2.clone(),
                    target: target.to_string(),
                });
            }
            axis_values(sweep, false)?
        }
        None => vec![],
    };
    let total = primary.len() * secondary.len().max(1);
    if total > MAX_POINTS {
        return Err(invalid(
            "sweep",
            format!("{total} points exceeds the {MAX_POINTS}-point limit"),
        ));
    }
    // The first tuple must produce a valid underlying configuration.
    let mut probe = base_config(config, sweep);
    apply_parameter(&mut probe, &sweep.parameter, primary[0])?;
    if let (Some(p2), Some(v2)) = (&sweep.parameter2, secondary.first()) {
        apply_parameter(&mut probe, p2, *v2)?;
    }
    probe.validate()
}

/// The per-point configuration: the sweep config with the target scenario.
fn base_config(config: &RunConfig, sweep: &SweepSection) -> RunConfig {
    let mut base = config.clone();
    base.scenario = match sweep.target.as_str() {
        "echo" => Scenario::Echo,
        "cavity" => Scenario::Cavity,
        "spinwave" => Scenario::Spinwave,
        _ => unreachable!("validated"),
    };
    base.sweep = None;
    base
}

struct SweepRow {
    values: Vec<f64>,
    outputs: Vec<f64>,
}

fn echo_row(config: &RunConfig, opts: &RunOptions) -> Result<Vec<f64>, CliError> {
    let setup = config.echo_setup(opts.grid_points)?;
    let result = run_two_level(&setup).map_err(|e| CliError::Numeric(e.to_string()))?;
    Ok(vec![
        result.efficiency,
        result.analytic_prediction,
        result.relative_deviation,
        result.echo_peak_delay,
    ])
}

fn cavity_row(config: &RunConfig, opts: &RunOptions) -> Result<Vec<f64>, CliError> {
    let cav = config.cavity_params()?;
    let grid = config
        .grid_spec(opts.grid_points)?
        .build()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let medium = build_medium(config, &grid)?;
    let reflection =
        reflection_response(&cav, &medium).map_err(|e| CliError::Numeric(e.to_string()))?;
    let at_center = reflection.transfer[grid.center_bin()].norm_sqr();
    let medium_section = config.medium_section()?;
    let probe = medium_section
        .probe_span_mhz
        .map(|v| v * 1e6)
        .unwrap_or(grid.span() / 4.0);
    let target: &ComplexResponse<f64> = &medium;
    let linewidth = match cavity_linewidth(&cav, target, probe) {
        Ok(lw) => lw,
        Err(CavityError::DipTooShallow { .. }) | Err(CavityError::ResonanceNotFound) => f64::NAN,
        Err(e) => return Err(CliError::Numeric(e.to_string())),
    };
    Ok(vec![at_center, linewidth])
}

fn spinwave_row(config: &RunConfig, opts: &RunOptions) -> Result<Vec<f64>, CliError> {
    let setup = config.spin_wave_setup(opts.grid_points)?;
    let result = run_spin_wave(&setup).map_err(|e| CliError::Numeric(e.to_string()))?;
    Ok(vec![
        result.budget.eta_sw,
        result.budget.eta_t,
        result.budget.eta_total,
    ])
}

fn output_columns(target: &str) -> &'static [&'static str] {
    match target {
        "echo" => &[
            "efficiency",
            "analytic_prediction",
            "relative_deviation",
            "echo_peak_delay_s",
        ],
        "cavity" => &["reflection_at_center_abs2", "linewidth_hz"],
        "spinwave" => &["eta_sw", "eta_t", "eta_total"],
        _ => unreachable!("validated"),
    }
}

pub fn sweep_scenario(
    config: &RunConfig,
    opts: &RunOptions,
) -> Result<Vec<(String, String)>, CliError> {
    let sweep = config.sweep_section()?;
    validate(config, sweep)?;
    let primary = axis_values(sweep, true)?;
    let secondary = match &sweep.parameter2 {
        Some(_) => Some(axis_values(sweep, false)?),
        None => None,
    };
    let template = base_config(config, sweep);

    let mut rows: Vec<SweepRow> = Vec::new();
    let tuples: Vec<Vec<f64>> = match &secondary {
        None => primary.iter().map(|v| vec![*v]).collect(),
        Some(sec) => primary
            .iter()
            .flat_map(|a| sec.iter().map(move |b| vec![*a, *b]))
            .collect(),
    };
    for tuple in tuples {
        let mut point = template.clone();
        apply_parameter(&mut point, &sweep.parameter, tuple[0])?;
        if let Some(p2) = &sweep.parameter2 {
            apply_parameter(&mut point, p2, tuple[1])?;
        }
        let outputs = match sweep.target.as_str() {
            "echo" => echo_row(&point, opts)?,
            "cavity" => cavity_row(&point, opts)?,
            "spinwave" => spinwave_row(&point, opts)?,
            _ => unreachable!("validated"),
        };
        rows.push(SweepRow {
            values: tuple,
            outputs,
        });
    }

    let mut header: Vec<String> = vec![sweep.parameter.clone()];
    if let Some(p2) = &sweep.parameter2 {
        header.push(p2.clone());
    }
    header.extend(output_columns(&sweep.target).iter().map(|s| s.to_string()));
    let mut table = header.join(",");
    table.push('\n');
    for row in &rows {
        let cells: Vec<String> = row
            .values
            .iter()
            .chain(row.outputs.iter())
            .map(|v| csv::sci(*v))
            .collect();
        table.push_str(&cells.join(","));
        table.push('\n');
    }

    let mut report = String::from("# afcsim report\nscenario = sweep\n");
    let _ = writeln!(report, "target = {}", sweep.target);
    let _ = writeln!(report, "parameter = {}", sweep.parameter);
    if let Some(p2) = &sweep.parameter2 {
        let _ = writeln!(report, "parameter2 = {p2}");
    }
    let _ = writeln!(report, "rows = {}", rows.len());
    let _ = write!(
        report,
        "\n## resolved configuration\n{}",
        config.to_toml()
    );

    Ok(vec![
        ("sweep.csv".into(), table),
        ("report.txt".into(), report),
    ])
}
