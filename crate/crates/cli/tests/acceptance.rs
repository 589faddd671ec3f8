//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N: PASS` line (visible with `--nocapture`). Tolerances are
//! pinned in the assertions.

use std::time::Instant;

use afcsim_core::analytic::{
    eta_cavity_finite_depth, eta_cavity_loss, eta_deph_square, eta_single_pass,
    eta_spin_dephasing, impedance_match_depth, impedance_match_reflectivity, optimal_finesse,
    total_budget, CombParams, SpinParams, ToothShape,
};
use afcsim_core::bloch::{
    integrate_bloch, reference_sech_pulse, transfer_efficiency, uniform_weights, ConstantPulse,
    IntegratorOptions,
};
use afcsim_core::cavity::{cavity_echo_efficiency, reflection_response, CavityParams};
use afcsim_core::propagation::{
    echo_efficiency, first_echo_peak_time, gaussian_pulse, impulse_response, propagate, TimeGrid,
};
use afcsim_core::spectrum::{
    kramers_kronig_response, square_comb, transparency_window, FrequencyGrid,
};

use afcsim_cli::runner::{compute, execute, RunOptions};
use afcsim_cli::{load_config, CliError};

fn pass(n: u32, detail: impl std::fmt::Display) {
    println!("criterion {n}: PASS - {detail}");
}

fn default_grid() -> FrequencyGrid<f64> {
    FrequencyGrid::new(1 << 18, 80.0e6).unwrap()
}

struct Echo {
    efficiency: f64,
    peak_delay: f64,
}

fn run_single_pass(d: f64, finesse: f64, spacing: f64, n: usize, fwhm: f64, center: f64) -> Echo {
    let fgrid = FrequencyGrid::new(n, 80.0e6).unwrap();
    let tgrid = TimeGrid::conjugate_of(&fgrid);
    let comb = CombParams::new(d, spacing, finesse, ToothShape::Square, 5.0e6).unwrap();
    let response = kramers_kronig_response(&square_comb(&comb, &fgrid).unwrap()).unwrap();
    let input = gaussian_pulse(fwhm, center, 0.0, &tgrid).unwrap();
    let output = propagate(&input, &response).unwrap();
    let delay = comb.echo_delay();
    let efficiency = echo_efficiency(
        &output,
        &input,
        center + delay,
        4.0 * fwhm,
        3.0 * fwhm,
    )
    .unwrap();
    let peak = first_echo_peak_time(&output, center, 3.0 * fwhm).unwrap();
    Echo {
        efficiency,
        peak_delay: peak - center,
    }
}

/// Criterion 1: the strong-comb design point of the closed-form theory.
#[test]
fn criterion_01_optimal_finesse_and_half_efficiency() {
    let start = Instant::now();
    let f_opt = optimal_finesse(12.0_f64).unwrap();
    let eta = eta_single_pass(12.0_f64 / 6.5, 6.5).unwrap();
    let elapsed = start.elapsed();
    assert!((f_opt - 6.5).abs() <= 0.1, "F_opt {f_opt}");
    assert!((eta - 0.50).abs() <= 0.01, "eta {eta}");
    assert!(elapsed.as_micros() < 1000, "took {elapsed:?}");
    pass(1, format!("F_opt(12) = {f_opt:.3}, eta = {eta:.4}, {elapsed:?}"));
}

/// Criterion 2: single-pass ceiling, closed form against spectral
/// propagation at the default grid.
#[test]
fn criterion_02_single_pass_ceiling() {
    let start = Instant::now();
    let f_opt = optimal_finesse(0.8_f64).unwrap();
    let analytic = eta_single_pass(0.8 / f_opt, f_opt).unwrap();
    let sim = run_single_pass(0.8, f_opt, 250.0e3, 1 << 18, 0.441e-6, 2.0e-6);
    let elapsed = start.elapsed();
    assert!((analytic - 0.044).abs() <= 0.003, "analytic {analytic}");
    assert!((sim.efficiency - 0.044).abs() <= 0.003, "simulated {}", sim.efficiency);
    let rel = (sim.efficiency - analytic).abs() / analytic;
    assert!(rel <= 0.03, "relative deviation {rel}");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(
        2,
        format!(
            "analytic {analytic:.4}, simulated {:.4} (rel {:.3}%), {elapsed:?}",
            sim.efficiency,
            rel * 100.0
        ),
    );
}

/// Criterion 3: impedance match against the front mirror.
#[test]
fn criterion_03_impedance_match() {
    let grid = FrequencyGrid::new(1 << 12, 200.0e6).unwrap();
    let cav = CavityParams::new(0.73, 1.0, 0.0, 500.0e6, 0.0).unwrap();
    let mut best = (f64::INFINITY, 0.0);
    let mut d_tilde = 0.05_f64;
    while d_tilde <= 0.40 {
        let profile = transparency_window(d_tilde, 0.0, &grid).unwrap();
        let medium = kramers_kronig_response(&profile).unwrap();
        let r = reflection_response(&cav, &medium).unwrap();
        let at_center = r.transfer[grid.center_bin()].norm_sqr();
        if at_center < best.0 {
            best = (at_center, d_tilde);
        }
        d_tilde += 0.001;
    }
    assert!((best.1 - 0.157).abs() <= 0.005, "minimizer {}", best.1);

    let matched = impedance_match_depth(0.73_f64).unwrap();
    let profile = transparency_window(matched, 0.0, &grid).unwrap();
    let medium = kramers_kronig_response(&profile).unwrap();
    let r = reflection_response(&cav, &medium).unwrap();
    let residual = r.transfer[grid.center_bin()].norm_sqr();
    assert!(residual < 1e-3, "residual {residual}");
    pass(
        3,
        format!("reflection minimum at d~ = {:.4}, residual {residual:.2e}", best.1),
    );
}

/// Criterion 4: the closed-form cavity ceilings.
#[test]
fn criterion_04_cavity_ceilings() {
    let deph = eta_deph_square(5.0_f64).unwrap();
    assert!((deph - 0.875).abs() <= 0.001, "deph {deph}");
    let depth = eta_cavity_finite_depth(0.2_f64).unwrap();
    assert!((depth - 0.99).abs() <= 0.005, "finite-depth factor {depth}");
    let loss_a = eta_cavity_loss(0.1_f64, 0.02).unwrap().value;
    assert!((loss_a - 0.82).abs() <= 0.005, "loss factor {loss_a}");
    let loss_b = eta_cavity_loss(0.16_f64, 0.03).unwrap().value;
    assert!((loss_b - 0.83).abs() <= 0.005, "loss factor {loss_b}");
    let product = deph * loss_b;
    assert!((product - 0.73).abs() <= 0.01, "ceiling {product}");
    pass(
        4,
        format!("deph {deph:.4}, depth {depth:.4}, loss {loss_a:.4}/{loss_b:.4}, ceiling {product:.4}"),
    );
}

/// Criterion 5: full time-domain cavity echo against the closed-form
/// product, with and without intracavity loss.
#[test]
fn criterion_05_cavity_echo_oracle() {
    let start = Instant::now();
    let d = 0.8_f64;
    let finesse = 5.0_f64;
    let d_tilde = d / finesse;
    let r1 = impedance_match_reflectivity(d_tilde).unwrap();
    let grid = FrequencyGrid::new(1 << 16, 80.0e6).unwrap();
    let comb = CombParams::new(d, 100.0e3, finesse, ToothShape::Square, 5.0e6).unwrap();
    let medium = kramers_kronig_response(&square_comb(&comb, &grid).unwrap()).unwrap();
    let tgrid = TimeGrid::conjugate_of(&grid);
    let pulse = gaussian_pulse(0.551e-6, 4.0e-6, 0.0, &tgrid).unwrap();
    let mut detail = String::new();
    for eps in [0.0, 0.03] {
        let cav = CavityParams::new(r1, 1.0, eps, 500.0e6, 0.0).unwrap();
        let echo = cavity_echo_efficiency(
            &cav,
            &medium,
            &pulse,
            10.0e-6,
            4.0 * 0.551e-6,
            3.0 * 0.551e-6,
        )
        .unwrap();
        let expected = eta_deph_square(finesse).unwrap()
            * eta_cavity_finite_depth(d_tilde).unwrap()
            * eta_cavity_loss(d_tilde, eps).unwrap().value;
        let rel = (echo.efficiency - expected).abs() / expected;
        assert!(
            rel <= 0.05,
            "eps = {eps}: simulated {} vs product {expected} (rel {rel})",
            echo.efficiency
        );
        detail.push_str(&format!(
            "eps {eps}: {:.4} vs {expected:.4} (rel {:.2}%); ",
            echo.efficiency,
            rel * 100.0
        ));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(5, format!("{detail}{elapsed:?}"));
}

/// Criterion 6: echo timing at 1/spacing for three tooth spacings.
#[test]
fn criterion_06_echo_timing() {
    let dt = 1.0 / 80.0e6;
    let mut detail = String::new();
    for &(spacing, fwhm, center) in &[
        (500.0e3, 0.30e-6, 2.0e-6),
        (100.0e3, 1.5e-6, 6.0e-6),
        (40.0e3, 1.5e-6, 10.0e-6),
    ] {
        let run = run_single_pass(0.8, 5.0, spacing, 1 << 17, fwhm, center);
        let expected = 1.0 / spacing;
        assert!(
            (run.peak_delay - expected).abs() <= dt * (1.0 + 1e-9),
            "spacing {spacing}: peak delay {} vs {expected}",
            run.peak_delay
        );
        detail.push_str(&format!("1/{:.0}kHz -> {:.3}us; ", spacing / 1e3, run.peak_delay * 1e6));
    }
    pass(6, detail);
}

/// Criterion 7: control-pulse transfer. The averaging window for the mean is
/// 0.5 MHz; the hard 4 us truncation limits the chirp crossing range to
/// ±364 kHz, which makes wider uniform windows fall off sharply.
#[test]
fn criterion_07_bloch_transfer() {
    let opts = IntegratorOptions::default();
    let pulse = reference_sech_pulse(10.0e-6_f64);
    let eta_t = transfer_efficiency(&pulse, &uniform_weights(0.5e6), &opts).unwrap();
    assert!((eta_t - 0.91).abs() <= 0.03, "eta_T {eta_t}");

    let omega = 125.0e3_f64;
    let pi_pulse = ConstantPulse {
        omega,
        start: 0.0,
        stop: 0.5 / omega,
    };
    let state = integrate_bloch(0.0, &pi_pulse, &opts).unwrap();
    let p = state.transfer_probability();
    assert!((p - 1.0).abs() <= 1e-6, "pi-pulse transfer {p}");

    let adiabatic = integrate_bloch(0.2e6, &pulse, &opts).unwrap();
    assert!((adiabatic.norm() - 1.0).abs() <= 1e-6, "norm {}", adiabatic.norm());
    pass(
        7,
        format!("eta_T {eta_t:.4}, pi-pulse transfer {p:.8}, norm {:.8}", adiabatic.norm()),
    );
}

/// Criterion 8: spin dephasing, closed form and ensemble-average oracle.
#[test]
fn criterion_08_spin_dephasing() {
    let spin = SpinParams::new(26.5e3_f64).unwrap();
    let closed = eta_spin_dephasing(&spin, 5.3e-6).unwrap();
    assert!((closed - 0.87).abs() <= 0.005, "closed form {closed}");

    // Quadrature over the Gaussian detuning ensemble.
    let sigma = 26.5e3 / (8.0 * 2.0_f64.ln()).sqrt();
    let n = 40_001;
    let (mut re, mut im, mut norm) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let delta = -8.0 * sigma + 16.0 * sigma * i as f64 / (n - 1) as f64;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let g = w * (-(delta * delta) / (2.0 * sigma * sigma)).exp();
        let phase = 2.0 * std::f64::consts::PI * delta * 5.3e-6;
        re += g * phase.cos();
        im += g * phase.sin();
        norm += g;
    }
    let oracle = (re * re + im * im) / (norm * norm);
    assert!((closed - oracle).abs() <= 1e-4, "closed {closed} vs oracle {oracle}");
    pass(8, format!("eta_sw {closed:.4}, oracle {oracle:.4}"));
}

/// Criterion 9: the spin-wave efficiency budget, directly and through the
/// spin-wave runner.
#[test]
fn criterion_09_budget() {
    let spin = SpinParams::new(26.5e3_f64).unwrap();
    let eta_sw = eta_spin_dephasing(&spin, 5.3e-6).unwrap();
    let budget = total_budget(0.28_f64, 0.70, eta_sw, 1.0).unwrap();
    assert!((budget.eta_total - 0.119).abs() <= 0.002, "total {}", budget.eta_total);
    let extrapolated = 0.28_f64 * 0.70 * 0.70;
    assert!((extrapolated - 0.137).abs() <= 0.003, "extrapolated {extrapolated}");

    // End to end through the bundled configuration.
    let config = load_config("spinwave-paper").unwrap();
    let artifacts = compute(&config, &RunOptions::default()).unwrap();
    let report = &artifacts
        .iter()
        .find(|(name, _)| name == "report.txt")
        .unwrap()
        .1;
    let total = extract(report, "eta_total");
    assert!((total - budget.eta_total).abs() < 1e-9, "report total {total}");
    pass(
        9,
        format!("eta_total {:.4}, extrapolated {extrapolated:.4}", budget.eta_total),
    );
}

/// Criterion 10: empty-cavity linewidth and dispersion narrowing inside a
/// transmission window.
#[test]
fn criterion_10_linewidth_narrowing() {
    let config = load_config("cavity-linewidth").unwrap();
    let artifacts = compute(&config, &RunOptions::default()).unwrap();
    let report = &artifacts
        .iter()
        .find(|(name, _)| name == "report.txt")
        .unwrap()
        .1;
    let empty = extract(report, "empty_linewidth_hz");
    let narrowed = extract(report, "medium_linewidth_hz");
    assert!((empty - 25.0e6).abs() <= 1.0e6, "empty linewidth {empty}");
    assert!(
        (1.0e6..=5.0e6).contains(&narrowed),
        "narrowed linewidth {narrowed}"
    );
    pass(
        10,
        format!("empty {:.2} MHz, narrowed {:.2} MHz", empty / 1e6, narrowed / 1e6),
    );
}

/// Criterion 11: property suite. Causality, passivity, linearity,
/// grid-refinement stability and byte-identical reruns.
#[test]
fn criterion_11_property_suite() {
    // Causality of the reference comb on the default grid.
    let grid = default_grid();
    let comb = CombParams::new(0.8, 250.0e3, 5.0, ToothShape::Square, 5.0e6).unwrap();
    let response = kramers_kronig_response(&square_comb(&comb, &grid).unwrap()).unwrap();
    let h = impulse_response(&response);
    let n = h.grid.n_points();
    let total: f64 = h.envelope.iter().map(|v| v.norm_sqr()).sum();
    let pre: f64 = h.envelope[n / 2 + 1..].iter().map(|v| v.norm_sqr()).sum();
    let causality = pre / total;
    assert!(causality < 1e-6, "pre-pulse energy fraction {causality}");

    // Passivity of the medium and of the cavity reflection.
    for v in &response.transfer {
        assert!(v.norm() <= 1.0 + 1e-12);
    }
    let cav = CavityParams::new(0.73, 0.995, 0.01, 500.0e6, 0.0).unwrap();
    let reflection = reflection_response(&cav, &response).unwrap();
    for v in &reflection.transfer {
        assert!(v.norm() <= 1.0 + 1e-12);
    }

    // Linearity: scaling the input leaves the efficiency untouched.
    let tgrid = TimeGrid::conjugate_of(&grid);
    let input = gaussian_pulse(0.441e-6, 2.0e-6, 0.0, &tgrid).unwrap();
    let out = propagate(&input, &response).unwrap();
    let eta_unit = echo_efficiency(&out, &input, 6.0e-6, 4.0 * 0.441e-6, 3.0 * 0.441e-6).unwrap();
    let scaled = input.scaled(num_complex::Complex::new(0.0_f64, 2.5));
    let out_scaled = propagate(&scaled, &response).unwrap();
    let eta_scaled =
        echo_efficiency(&out_scaled, &scaled, 6.0e-6, 4.0 * 0.441e-6, 3.0 * 0.441e-6).unwrap();
    assert!((eta_unit - eta_scaled).abs() < 1e-12, "{eta_unit} vs {eta_scaled}");

    // Grid refinement changes the echo efficiency by < 0.5%.
    let f_opt = optimal_finesse(0.8_f64).unwrap();
    let coarse = run_single_pass(0.8, f_opt, 250.0e3, 1 << 18, 0.441e-6, 2.0e-6);
    let fine = run_single_pass(0.8, f_opt, 250.0e3, 1 << 19, 0.441e-6, 2.0e-6);
    let refinement = (coarse.efficiency - fine.efficiency).abs() / fine.efficiency;
    assert!(refinement < 0.005, "refinement change {refinement}");

    // Determinism: identical configs produce byte-identical artifacts.
    let config = load_config("fig2a").unwrap();
    let base = std::env::temp_dir().join(format!("afcsim-acceptance-{}", std::process::id()));
    let dir_a = base.join("a");
    let dir_b = base.join("b");
    let run_a = execute(&config, &dir_a, &RunOptions::default()).unwrap();
    let run_b = execute(&config, &dir_b, &RunOptions::default()).unwrap();
    assert_eq!(run_a.files.len(), run_b.files.len());
    for (fa, fb) in run_a.files.iter().zip(&run_b.files) {
        let a = std::fs::read(fa).unwrap();
        let b = std::fs::read(fb).unwrap();
        assert_eq!(a, b, "artifacts differ: {fa:?} vs {fb:?}");
    }
    std::fs::remove_dir_all(&base).ok();
    pass(
        11,
        format!(
            "causality {causality:.2e}, passivity ok, linearity ok, refinement {:.3}%, reruns byte-identical",
            refinement * 100.0
        ),
    );
}

fn extract(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|line| {
            let (k, v) = line.split_once(" = ")?;
            (k == key).then(|| v.trim().parse::<f64>().ok())?
        })
        .unwrap_or_else(|| panic!("key {key} missing from report"))
}

/// The CLI maps error classes onto documented exit codes.
#[test]
fn exit_codes_are_stable() {
    let missing = load_config("/nonexistent/afcsim.toml").unwrap_err();
    assert_eq!(missing.exit_code(), 4);
    assert!(matches!(missing, CliError::Io { .. }));

    let bad = afcsim_cli::config::RunConfig::from_toml("scenario = \"echo\"\n[comb]\npeak_depth = 0.8\ntooth_spacing_khz = 250.0\nfinesse = 0.5\n");
    let err = CliError::Config(bad.unwrap_err());
    assert_eq!(err.exit_code(), 2);
}
