//! Scenario execution: compute everything first, then write the report and
//! CSV artifacts. A failed run therefore leaves no partial files behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use afcsim_core::bloch::{integrate_bloch, transfer_curve, transfer_efficiency, uniform_weights};
use afcsim_core::cavity::{cavity_linewidth, reflection_response, CavityError};
use afcsim_core::csv;
use afcsim_core::scenario::{optimize_cavity_design, run_spin_wave, run_two_level};
use afcsim_core::spectrum::{
    gaussian_comb, group_delay, kramers_kronig_response, square_comb, transparency_window,
    ComplexResponse, FrequencyGrid,
};
use afcsim_core::analytic::ToothShape;

use crate::config::{RunConfig, Scenario};
use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `[grid] n_points` without touching the config.
    pub grid_points: Option<usize>,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

/// One output file, computed in memory before anything touches the disk.
type Artifact = (String, String);

pub fn execute(
    config: &RunConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<RunArtifacts, CliError> {
    let artifacts = compute(config, opts)?;
    write_artifacts(out_dir, &artifacts).map(|files| RunArtifacts {
        files,
        summary: summary_of(&artifacts),
    })
}

fn summary_of(artifacts: &[Artifact]) -> String {
    artifacts
        .iter()
        .find(|(name, _)| name == "report.txt")
        .map(|(_, report)| {
            report
                .lines()
                .take_while(|line| !line.starts_with("## "))
                .collect::<Vec<_>>()
                .join("\n")
        })
        .unwrap_or_default()
}

fn write_artifacts(out_dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let io_err = |path: &Path, source: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut written = Vec::with_capacity(artifacts.len());
    for (name, contents) in artifacts {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn compute(config: &RunConfig, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    config.validate()?;
    match config.scenario {
        Scenario::Comb => comb_scenario(config, opts),
        Scenario::Echo => echo_scenario(config, opts),
        Scenario::Cavity => cavity_scenario(config, opts),
        Scenario::Bloch => bloch_scenario(config),
        Scenario::Spinwave => spinwave_scenario(config, opts),
        Scenario::Design => design_scenario(config),
        Scenario::Sweep => crate::sweep::sweep_scenario(config, opts),
    }
}

struct Report {
    lines: String,
}

impl Report {
    fn new(scenario: &str) -> Self {
        let mut lines = String::from("# afcsim report\n");
        let _ = writeln!(lines, "scenario = {scenario}");
        Self { lines }
    }

    fn num(&mut self, key: &str, value: f64) -> &mut Self {
        let _ = writeln!(self.lines, "{key} = {}", csv::sci(value));
        self
    }

    fn text(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.lines, "{key} = {value}");
        self
    }

    fn finish(mut self, config: &RunConfig) -> String {
        let _ = write!(
            self.lines,
            "\n## resolved configuration\n{}",
            config.to_toml()
        );
        self.lines
    }
}

fn build_profile(
    config: &RunConfig,
    grid: &FrequencyGrid<f64>,
) -> Result<afcsim_core::spectrum::AbsorptionProfile<f64>, CliError> {
    let comb = config.comb_params()?;
    match comb.tooth_shape {
        ToothShape::Square => square_comb(&comb, grid).map_err(numeric),
        ToothShape::Gaussian => gaussian_comb(&comb, grid).map_err(numeric),
    }
}

fn comb_scenario(config: &RunConfig, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let comb = config.comb_params()?;
    let grid = config.grid_spec(opts.grid_points)?.build().map_err(numeric)?;
    let profile = build_profile(config, &grid)?;
    let response = kramers_kronig_response(&profile).map_err(numeric)?;
    let delay = group_delay(&response);
    let half_export = comb.total_bandwidth * 0.75;

    let mut report = Report::new("comb");
    report
        .num("peak_depth", comb.peak_depth)
        .num("tooth_spacing_hz", comb.tooth_spacing)
        .num("finesse", comb.finesse)
        .num("tooth_width_hz", comb.tooth_width())
        .num("avg_depth", comb.avg_depth())
        .num(
            "mean_depth_sampled",
            profile.mean_depth_over(comb.total_bandwidth / 2.0),
        )
        .num("echo_delay_s", comb.echo_delay())
        .num("group_delay_center_s", delay.center)
        .text("phase_unwrap_suspect", delay.unwrap_suspect);
    Ok(vec![
        ("profile.csv".into(), csv::profile_csv(&profile, half_export)),
        ("response.csv".into(), csv::response_csv(&response, half_export)),
        ("report.txt".into(), report.finish(config)),
    ])
}

fn echo_scenario(config: &RunConfig, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let setup = config.echo_setup(opts.grid_points)?;
    let result = run_two_level(&setup).map_err(numeric)?;
    let t_max = setup.pulse.center + result.echo_delay + 8.0 * setup.pulse.fwhm;

    let mut report = Report::new("echo");
    report
        .text("cavity", if setup.cavity.is_some() { "on" } else { "off" })
        .num("peak_depth", setup.comb.peak_depth)
        .num("finesse", setup.comb.finesse)
        .num("avg_depth", setup.comb.avg_depth())
        .num("echo_delay_s", result.echo_delay)
        .num("simulated_efficiency", result.efficiency)
        .num("analytic_prediction", result.analytic_prediction)
        .num("relative_deviation", result.relative_deviation)
        .num("echo_peak_delay_s", result.echo_peak_delay)
        .text("in_regime", result.in_regime);
    Ok(vec![
        (
            "input.csv".into(),
            csv::waveform_csv(&result.input, 0.0, t_max, 20_000),
        ),
        (
            "output.csv".into(),
            csv::waveform_csv(&result.output, 0.0, t_max, 20_000),
        ),
        ("report.txt".into(), report.finish(config)),
    ])
}

pub(crate) fn build_medium(
    config: &RunConfig,
    grid: &FrequencyGrid<f64>,
) -> Result<ComplexResponse<f64>, CliError> {
    let medium = config.medium_section()?;
    match medium.kind.as_str() {
        "empty" => Ok(ComplexResponse::identity(*grid)),
        "uniform" => {
            let profile =
                transparency_window(medium.depth.unwrap(), 0.0, grid).map_err(numeric)?;
            kramers_kronig_response(&profile).map_err(numeric)
        }
        "window" => {
            let profile = transparency_window(
                medium.background_depth.unwrap(),
                medium.width_mhz.unwrap() * 1e6,
                grid,
            )
            .map_err(numeric)?;
            kramers_kronig_response(&profile).map_err(numeric)
        }
        "comb" => {
            let profile = build_profile(config, grid)?;
            kramers_kronig_response(&profile).map_err(numeric)
        }
        _ => unreachable!("validated"),
    }
}

fn cavity_scenario(config: &RunConfig, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let cav = config.cavity_params()?;
    let grid = config.grid_spec(opts.grid_points)?.build().map_err(numeric)?;
    let medium_section = config.medium_section()?;
    let medium = build_medium(config, &grid)?;
    let reflection = reflection_response(&cav, &medium).map_err(numeric)?;
    let probe = medium_section
        .probe_span_mhz
        .map(|v| v * 1e6)
        .unwrap_or(grid.span() / 4.0);

    let empty = ComplexResponse::identity(grid);
    // A perfectly lossless symmetric-limit cavity has no reflection dip at
    // all; the reference linewidth is then reported as unmeasurable.
    let empty_linewidth = match cavity_linewidth(&cav, &empty, 0.75 * grid.span()) {
        Ok(lw) => Some(lw),
        Err(CavityError::DipTooShallow { .. }) | Err(CavityError::ResonanceNotFound) => None,
        Err(e) => return Err(numeric(e)),
    };
    let medium_is_empty = medium_section.kind == "empty";
    let medium_linewidth = if medium_is_empty {
        empty_linewidth.ok_or(CavityError::ResonanceNotFound)
    } else {
        cavity_linewidth(&cav, &medium, probe)
    };
    let delay = group_delay(&medium);
    let at_center = reflection.transfer[grid.center_bin()].norm_sqr();

    let mut report = Report::new("cavity");
    report
        .text("medium", &medium_section.kind)
        .num("empty_linewidth_hz", empty_linewidth.unwrap_or(f64::NAN))
        .num("expected_empty_linewidth_hz", cav.empty_linewidth())
        .num("reflection_at_center_abs2", at_center)
        .num("group_delay_center_s", delay.center);
    match medium_linewidth {
        Ok(lw) => {
            report
                .text("linewidth_valid", true)
                .num("medium_linewidth_hz", lw)
                .num(
                    "narrowing_ratio",
                    empty_linewidth.map(|e| e / lw).unwrap_or(f64::NAN),
                );
        }
        Err(CavityError::DipTooShallow { contrast }) => {
            report
                .text("linewidth_valid", false)
                .text("linewidth_failure", format!("dip contrast {contrast:.3e} below 5%"));
        }
        Err(CavityError::ResonanceNotFound) => {
            report
                .text("linewidth_valid", false)
                .text("linewidth_failure", "no resonance dip inside the probe span");
        }
        Err(e) => return Err(numeric(e)),
    }
    let export_span = probe.min(grid.span() / 2.0);
    Ok(vec![
        (
            "reflection.csv".into(),
            csv::reflection_csv(&reflection, export_span),
        ),
        ("report.txt".into(), report.finish(config)),
    ])
}

fn bloch_scenario(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let control = config.control_params()?;
    let section = config.transfer_section();
    let opts = config.integrator_options()?;
    let bandwidth = section.bandwidth_mhz.unwrap_or(0.5) * 1e6;
    let curve_span = section.curve_span_mhz.unwrap_or(3.0) * 1e6;
    let points = section.points.unwrap_or(201).clamp(3, 10_001);

    let detunings: Vec<f64> = (0..points)
        .map(|i| -curve_span / 2.0 + curve_span * i as f64 / (points - 1) as f64)
        .collect();
    let curve = transfer_curve(&control, &detunings, &opts).map_err(numeric)?;
    let eta_t = transfer_efficiency(&control, &uniform_weights(bandwidth), &opts)
        .map_err(numeric)?;
    let resonant = integrate_bloch(0.0, &control, &opts).map_err(numeric)?;

    let mut report = Report::new("bloch");
    report
        .num("omega_max_hz", control.omega_max)
        .num("duration_s", control.duration)
        .num("chirp_range_hz", control.chirp_range)
        .num("truncation_s", control.truncation)
        .num("pulse_area_rad_untruncated", control.untruncated_area())
        .num("transfer_bandwidth_hz", bandwidth)
        .num("eta_t", eta_t)
        .num("resonant_transfer", resonant.transfer_probability())
        .num("bloch_norm", resonant.norm());
    Ok(vec![
        ("transfer.csv".into(), csv::transfer_csv(&curve)),
        ("report.txt".into(), report.finish(config)),
    ])
}

fn spinwave_scenario(config: &RunConfig, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let setup = config.spin_wave_setup(opts.grid_points)?;
    let result = run_spin_wave(&setup).map_err(numeric)?;
    let budget = &result.budget;

    let mut report = Report::new("spinwave");
    report
        .num("eta_2l", budget.eta_2l)
        .text("eta_2l_source", source(budget.eta_2l_simulated))
        .num("eta_t", budget.eta_t)
        .text("eta_t_source", source(budget.eta_t_simulated))
        .num("eta_sw", budget.eta_sw)
        .num("overlap", budget.overlap)
        .num("eta_total", budget.eta_total)
        .num("extrapolated_zero_tsw", result.extrapolated_zero_tsw)
        .num("afc_delay_s", result.timeline.afc_delay)
        .num("spin_wave_time_s", result.timeline.spin_wave_time())
        .num("output_time_s", result.timeline.output_time());
    Ok(vec![
        (
            "trace.csv".into(),
            csv::waveform_csv(&result.trace, 0.0, result.trace.grid.duration(), 20_000),
        ),
        ("report.txt".into(), report.finish(config)),
    ])
}

fn source(simulated: bool) -> &'static str {
    if simulated {
        "simulated"
    } else {
        "supplied"
    }
}

fn design_scenario(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let design = config.design_section()?;
    let scan = optimize_cavity_design(
        design.peak_depth,
        design.epsilon,
        design.max_finesse.unwrap_or(20.0),
        design.steps.unwrap_or(512),
    )
    .map_err(numeric)?;

    let mut table = String::from("finesse,d_tilde,r1,eta\n");
    for p in &scan.points {
        let _ = writeln!(
            table,
            "{},{},{},{}",
            csv::sci(p.finesse),
            csv::sci(p.d_tilde),
            csv::sci(p.r1.unwrap_or(f64::NAN)),
            csv::sci(p.eta)
        );
    }

    let mut report = Report::new("design");
    report
        .text(
            "mode",
            if design.epsilon.is_some() {
                "impedance-matched cavity"
            } else {
                "single-pass"
            },
        )
        .num("peak_depth", design.peak_depth)
        .num("best_finesse", scan.best.finesse)
        .num("best_d_tilde", scan.best.d_tilde)
        .num("best_eta", scan.best.eta);
    if let Some(r1) = scan.best.r1 {
        report.num("best_r1", r1);
    }
    report.text("boundary_solution", scan.boundary);
    Ok(vec![
        ("design.csv".into(), table),
        ("report.txt".into(), report.finish(config)),
    ])
}
