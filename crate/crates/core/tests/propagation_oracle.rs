//! Brute-force spectral propagation against the closed-form single-pass
//! theory, plus echo timing, ordering, linearity and grid-refinement checks.

use afcsim_core::analytic::{eta_single_pass, CombParams, ToothShape};
use afcsim_core::propagation::{
    echo_efficiency, first_echo_peak_time, gaussian_pulse, propagate, PulseWaveform, TimeGrid,
};
use afcsim_core::spectrum::{kramers_kronig_response, square_comb, FrequencyGrid};

const SPAN: f64 = 80.0e6;
const PULSE_FWHM: f64 = 0.441e-6;
const PULSE_CENTER: f64 = 2.0e-6;

struct EchoRun {
    efficiency: f64,
    peak_delay: f64,
    output: PulseWaveform<f64>,
    input: PulseWaveform<f64>,
}

fn run_echo(d: f64, finesse: f64, spacing: f64, n: usize, fwhm: f64, center: f64) -> EchoRun {
    let fgrid = FrequencyGrid::new(n, SPAN).unwrap();
    let tgrid = TimeGrid::conjugate_of(&fgrid);
    let comb = CombParams::new(d, spacing, finesse, ToothShape::Square, 5.0e6).unwrap();
    let profile = square_comb(&comb, &fgrid).unwrap();
    let response = kramers_kronig_response(&profile).unwrap();
    let input = gaussian_pulse(fwhm, center, 0.0, &tgrid).unwrap();
    let output = propagate(&input, &response).unwrap();
    let delay = comb.echo_delay();
    let efficiency =
        echo_efficiency(&output, &input, center + delay, 4.0 * fwhm, 3.0 * fwhm).unwrap();
    let peak = first_echo_peak_time(&output, center, 3.0 * fwhm).unwrap();
    EchoRun {
        efficiency,
        peak_delay: peak - center,
        output,
        input,
    }
}

#[test]
fn single_pass_matches_theory_across_finesse_and_depth() {
    // Tooth rasterization needs enough bins per tooth for a fair comparison
    // at high finesse, hence the per-finesse grid sizes.
    for &(finesse, n) in &[(3.0, 1 << 18), (5.0, 1 << 18), (10.0, 1 << 19)] {
        for &d_tilde in &[0.05, 0.2, 0.5, 1.0] {
            let d = d_tilde * finesse;
            let run = run_echo(d, finesse, 250.0e3, n, PULSE_FWHM, PULSE_CENTER);
            let expected = eta_single_pass(d_tilde, finesse).unwrap();
            let rel = (run.efficiency - expected).abs() / expected;
            assert!(
                rel < 0.03,
                "F={finesse} d~={d_tilde}: sim {} vs theory {expected} (rel {rel})",
                run.efficiency
            );
        }
    }
}

#[test]
fn strong_comb_reaches_half_efficiency() {
    let run = run_echo(12.0, 6.5, 250.0e3, 1 << 18, PULSE_FWHM, PULSE_CENTER);
    assert!(
        (run.efficiency - 0.50).abs() < 0.02,
        "sim {}",
        run.efficiency
    );
}

#[test]
fn echo_appears_at_inverse_tooth_spacing() {
    // (spacing Hz, grid size, pulse fwhm): finer spacings need longer grids.
    let cases = [
        (500.0e3, 1 << 17, 0.30e-6, 2.0e-6),
        (100.0e3, 1 << 17, 1.5e-6, 6.0e-6),
        (40.0e3, 1 << 17, 1.5e-6, 10.0e-6),
    ];
    for &(spacing, n, fwhm, center) in &cases {
        let run = run_echo(0.8, 5.0, spacing, n, fwhm, center);
        let dt = 1.0 / SPAN;
        let expected = 1.0 / spacing;
        assert!(
            (run.peak_delay - expected).abs() <= dt * (1.0 + 1e-9),
            "spacing {spacing}: peak at {} vs {expected} (dt {dt})",
            run.peak_delay
        );
    }
}

#[test]
fn second_echo_is_weaker_for_moderate_depth() {
    for &d_tilde in &[0.2, 0.5, 1.0] {
        let run = run_echo(5.0 * d_tilde, 5.0, 250.0e3, 1 << 18, PULSE_FWHM, PULSE_CENTER);
        let delay = 4.0e-6;
        let first = echo_efficiency(
            &run.output,
            &run.input,
            PULSE_CENTER + delay,
            4.0 * PULSE_FWHM,
            3.0 * PULSE_FWHM,
        )
        .unwrap();
        let second = echo_efficiency(
            &run.output,
            &run.input,
            PULSE_CENTER + 2.0 * delay,
            4.0 * PULSE_FWHM,
            3.0 * PULSE_FWHM,
        )
        .unwrap();
        assert!(
            second < first,
            "d~={d_tilde}: second {second} >= first {first}"
        );
    }
}

#[test]
fn efficiency_is_amplitude_invariant_and_linear() {
    let fgrid = FrequencyGrid::new(1 << 16, SPAN).unwrap();
    let tgrid = TimeGrid::conjugate_of(&fgrid);
    let comb = CombParams::new(0.8, 250.0e3, 5.0, ToothShape::Square, 5.0e6).unwrap();
    let response = kramers_kronig_response(&square_comb(&comb, &fgrid).unwrap()).unwrap();
    let input = gaussian_pulse(PULSE_FWHM, PULSE_CENTER, 0.0, &tgrid).unwrap();
    let out_unit = propagate(&input, &response).unwrap();

    let scaled = input.scaled(num_complex::Complex::new(2.5, 0.0));
    let out_scaled = propagate(&scaled, &response).unwrap();
    for (a, b) in out_unit.envelope.iter().zip(&out_scaled.envelope) {
        assert!((a * num_complex::Complex::new(2.5, 0.0) - b).norm() < 1e-12);
    }
    let eta_unit =
        echo_efficiency(&out_unit, &input, 6.0e-6, 4.0 * PULSE_FWHM, 3.0 * PULSE_FWHM).unwrap();
    let eta_scaled =
        echo_efficiency(&out_scaled, &scaled, 6.0e-6, 4.0 * PULSE_FWHM, 3.0 * PULSE_FWHM).unwrap();
    assert!((eta_unit - eta_scaled).abs() < 1e-12);
}

#[test]
fn echoes_shift_with_the_input() {
    let shift = 3.0e-6;
    let a = run_echo(0.8, 5.0, 250.0e3, 1 << 17, PULSE_FWHM, PULSE_CENTER);
    let b = run_echo(0.8, 5.0, 250.0e3, 1 << 17, PULSE_FWHM, PULSE_CENTER + shift);
    let dt = 1.0 / SPAN;
    assert!((a.peak_delay - b.peak_delay).abs() <= dt);
}

#[test]
fn energy_never_grows() {
    for &d_tilde in &[0.0, 0.1, 0.6] {
        let run = run_echo(5.0 * d_tilde, 5.0, 250.0e3, 1 << 16, PULSE_FWHM, PULSE_CENTER);
        let ratio = run.output.energy() / run.input.energy();
        assert!(ratio <= 1.0 + 1e-9, "d~={d_tilde}: energy ratio {ratio}");
    }
}

#[test]
fn grid_refinement_is_stable() {
    let coarse = run_echo(0.8, 5.0, 250.0e3, 1 << 18, PULSE_FWHM, PULSE_CENTER);
    let fine = run_echo(0.8, 5.0, 250.0e3, 1 << 19, PULSE_FWHM, PULSE_CENTER);
    let rel = (coarse.efficiency - fine.efficiency).abs() / fine.efficiency;
    assert!(rel < 0.005, "refinement changed efficiency by {rel}");
}
