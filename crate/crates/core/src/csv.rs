//! Plain-text CSV export of profiles, responses, traces and curves.
//!
//! All numbers use `.` as the decimal separator and scientific notation with
//! 12 significant digits; the header row is mandatory. Output is a pure
//! function of the data, so repeated exports are byte-identical.

use crate::float::Real;
use crate::propagation::PulseWaveform;
use crate::spectrum::{AbsorptionProfile, ComplexResponse};

/// Scientific notation with 12 significant digits.
pub fn sci<T: Real>(x: T) -> String {
    format!("{:.11e}", x)
}

/// `freq_hz,depth` rows of an absorption profile, restricted to |f| <=
/// `half_span` (pass the full span to export everything).
pub fn profile_csv<T: Real>(profile: &AbsorptionProfile<T>, half_span: T) -> String {
    let mut out = String::from("freq_hz,depth\n");
    for (j, d) in profile.depth.iter().enumerate() {
        let f = profile.grid.freq(j);
        if f.abs() <= half_span {
            out.push_str(&sci(f));
            out.push(',');
            out.push_str(&sci(*d));
            out.push('\n');
        }
    }
    out
}

/// `freq_hz,re,im` rows of a complex response, restricted to |f| <=
/// `half_span`.
pub fn response_csv<T: Real>(response: &ComplexResponse<T>, half_span: T) -> String {
    let mut out = String::from("freq_hz,re,im\n");
    for (j, h) in response.transfer.iter().enumerate() {
        let f = response.grid.freq(j);
        if f.abs() <= half_span {
            out.push_str(&sci(f));
            out.push(',');
            out.push_str(&sci(h.re));
            out.push(',');
            out.push_str(&sci(h.im));
            out.push('\n');
        }
    }
    out
}

/// `freq_hz,re,im,abs2` rows of a reflection spectrum, restricted to |f| <=
/// `half_span`.
pub fn reflection_csv<T: Real>(response: &ComplexResponse<T>, half_span: T) -> String {
    let mut out = String::from("freq_hz,re,im,abs2\n");
    for (j, h) in response.transfer.iter().enumerate() {
        let f = response.grid.freq(j);
        if f.abs() <= half_span {
            out.push_str(&sci(f));
            out.push(',');
            out.push_str(&sci(h.re));
            out.push(',');
            out.push_str(&sci(h.im));
            out.push(',');
            out.push_str(&sci(h.norm_sqr()));
            out.push('\n');
        }
    }
    out
}

/// `time_s,re,im,abs2` rows of a waveform between `t_min` and `t_max`,
/// decimated to at most `max_rows` rows with a deterministic stride.
pub fn waveform_csv<T: Real>(w: &PulseWaveform<T>, t_min: T, t_max: T, max_rows: usize) -> String {
    let mut rows: Vec<usize> = (0..w.grid.n_points())
        .filter(|&k| {
            let t = w.grid.time(k);
            t >= t_min && t <= t_max
        })
        .collect();
    let stride = rows.len().div_ceil(max_rows.max(1)).max(1);
    rows = rows.into_iter().step_by(stride).collect();
    let mut out = String::from("time_s,re,im,abs2\n");
    for k in rows {
        let e = w.envelope[k];
        out.push_str(&sci(w.grid.time(k)));
        out.push(',');
        out.push_str(&sci(e.re));
        out.push(',');
        out.push_str(&sci(e.im));
        out.push(',');
        out.push_str(&sci(e.norm_sqr()));
        out.push('\n');
    }
    out
}

/// `detuning_hz,transfer_prob` rows of a transfer-probability curve.
pub fn transfer_csv<T: Real>(curve: &[(T, T)]) -> String {
    let mut out = String::from("detuning_hz,transfer_prob\n");
    for (d, p) in curve {
        out.push_str(&sci(*d));
        out.push(',');
        out.push_str(&sci(*p));
        out.push('\n');
    }
    out
}
