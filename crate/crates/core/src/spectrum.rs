//! Sampled absorption profiles (combs, transparency windows) and the causal
//! complex transfer functions derived from them.
//!
//! The single-pass amplitude transfer of an absorbing medium is
//! H(ω) = exp(−d(ω)/2 + iφ(ω)) where the phase φ is the Hilbert-transform
//! partner of the attenuation, constructed so that the impulse response is
//! causal (minimum phase). Every function here is pure; profiles and
//! responses are plain immutable value types and safe to share across
//! threads once built.

use num_complex::Complex;
use thiserror::Error;

use crate::analytic::CombParams;
use crate::fft::{fft_forward, fft_inverse, half_rotate};
use crate::float::{as_f64, r64, Real};

pub const MIN_GRID_POINTS: usize = 1 << 10;
/// Fraction of the span that must stay absorption-free at each grid edge.
pub const GUARD_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("grid must have a power-of-two point count >= {MIN_GRID_POINTS} (got {n})")]
    InvalidGridSize { n: usize },
    #[error("grid span must be positive (got {span})")]
    InvalidGridSpan { span: f64 },
    #[error(
        "grid resolution {actual} Hz too coarse to sample the comb; \
         need <= {required} Hz (tooth width / 8)"
    )]
    ResolutionTooCoarse { required: f64, actual: f64 },
    #[error("structure bandwidth {bandwidth} Hz exceeds 80% of the grid span {span} Hz")]
    BandwidthExceedsGrid { bandwidth: f64, span: f64 },
    #[error("profile is not zero over the {GUARD_FRACTION:.0e}-fraction guard band at the grid edges")]
    GuardBandViolation,
    #[error("depth samples must be non-negative")]
    NegativeDepth,
    #[error("profile/grid length mismatch")]
    LengthMismatch,
}

/// Uniform symmetric frequency grid: n points spanning [−span/2, span/2),
/// with bin n/2 exactly at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid<T> {
    n_points: usize,
    span: T,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(n_points: usize, span: T) -> Result<Self, SpectrumError> {
        if !n_points.is_power_of_two() || n_points < MIN_GRID_POINTS {
            return Err(SpectrumError::InvalidGridSize { n: n_points });
        }
        if !(span > T::zero()) {
            return Err(SpectrumError::InvalidGridSpan { span: as_f64(span) });
        }
        Ok(Self { n_points, span })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn span(&self) -> T {
        self.span
    }

    /// Bin width in Hz.
    pub fn resolution(&self) -> T {
        self.span / T::from_usize(self.n_points).unwrap()
    }

    /// Frequency of bin `j`.
    pub fn freq(&self, j: usize) -> T {
        let centered = T::from_usize(j).unwrap() - T::from_usize(self.n_points / 2).unwrap();
        centered * self.resolution()
    }

    /// Bin nearest to frequency `f` (clamped to the grid).
    pub fn nearest_bin(&self, f: T) -> usize {
        let idx = (f / self.resolution()).round();
        let idx = idx + T::from_usize(self.n_points / 2).unwrap();
        let idx = idx
            .max(T::zero())
            .min(T::from_usize(self.n_points - 1).unwrap());
        num_traits::ToPrimitive::to_usize(&idx).unwrap()
    }

    pub fn center_bin(&self) -> usize {
        self.n_points / 2
    }

    pub fn freqs(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_points).map(move |j| self.freq(j))
    }
}

/// Sampled optical depth d(δ) ≥ 0 on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionProfile<T> {
    pub grid: FrequencyGrid<T>,
    pub depth: Vec<T>,
}

impl<T: Real> AbsorptionProfile<T> {
    pub fn new(grid: FrequencyGrid<T>, depth: Vec<T>) -> Result<Self, SpectrumError> {
        if depth.len() != grid.n_points() {
            return Err(SpectrumError::LengthMismatch);
        }
        if depth.iter().any(|d| !(*d >= T::zero())) {
            return Err(SpectrumError::NegativeDepth);
        }
        Ok(Self { grid, depth })
    }

    fn zeros(grid: FrequencyGrid<T>) -> Self {
        Self {
            depth: vec![T::zero(); grid.n_points()],
            grid,
        }
    }

    /// Number of edge bins that must stay absorption-free.
    fn guard_bins(&self) -> usize {
        (self.grid.n_points() as f64 * GUARD_FRACTION).ceil() as usize
    }

    pub fn guard_band_ok(&self) -> bool {
        let g = self.guard_bins();
        let n = self.depth.len();
        self.depth[..g].iter().all(|d| *d == T::zero())
            && self.depth[n - g..].iter().all(|d| *d == T::zero())
    }

    /// Mean depth over the band |f| <= half_width.
    pub fn mean_depth_over(&self, half_width: T) -> T {
        let mut sum = T::zero();
        let mut count = 0usize;
        for (j, d) in self.depth.iter().enumerate() {
            if self.grid.freq(j).abs() <= half_width {
                sum += *d;
                count += 1;
            }
        }
        if count == 0 {
            T::zero()
        } else {
            sum / T::from_usize(count).unwrap()
        }
    }

    /// Scale every depth sample; used to build double-pass profiles.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            grid: self.grid,
            depth: self.depth.iter().map(|d| *d * factor).collect(),
        }
    }
}

/// Complex single-pass amplitude transfer H(ω) on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexResponse<T> {
    pub grid: FrequencyGrid<T>,
    pub transfer: Vec<Complex<T>>,
}

impl<T: Real> ComplexResponse<T> {
    /// Unit transfer (empty medium).
    pub fn identity(grid: FrequencyGrid<T>) -> Self {
        Self {
            transfer: vec![Complex::new(T::one(), T::zero()); grid.n_points()],
            grid,
        }
    }

    /// Pointwise product of two responses on the same grid.
    pub fn compose(&self, other: &Self) -> Result<Self, SpectrumError> {
        if self.grid != other.grid {
            return Err(SpectrumError::LengthMismatch);
        }
        Ok(Self {
            grid: self.grid,
            transfer: self
                .transfer
                .iter()
                .zip(&other.transfer)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }
}

fn check_comb_grid<T: Real>(
    params: &CombParams<T>,
    grid: &FrequencyGrid<T>,
) -> Result<(), SpectrumError> {
    params
        .validate()
        .map_err(|_| SpectrumError::NegativeDepth)
        .ok();
    let required = params.tooth_width() / r64(8.0);
    if grid.resolution() > required {
        return Err(SpectrumError::ResolutionTooCoarse {
            required: as_f64(required),
            actual: as_f64(grid.resolution()),
        });
    }
    if params.total_bandwidth > grid.span() * r64(0.8) {
        return Err(SpectrumError::BandwidthExceedsGrid {
            bandwidth: as_f64(params.total_bandwidth),
            span: as_f64(grid.span()),
        });
    }
    Ok(())
}

/// Tooth center frequencies: `count` teeth spaced by Δ, centered on zero.
fn tooth_centers<T: Real>(params: &CombParams<T>) -> (usize, impl Iterator<Item = T>) {
    let count = num_traits::ToPrimitive::to_usize(
        &((params.total_bandwidth / params.tooth_spacing) + r64(1e-9)).floor(),
    )
    .unwrap_or(0);
    let spacing = params.tooth_spacing;
    let half = r64::<T>(0.5) * T::from_usize(count.saturating_sub(1)).unwrap();
    (
        count,
        (0..count).map(move |m| (T::from_usize(m).unwrap() - half) * spacing),
    )
}

/// Periodic square teeth of width Δ/F and height d, spacing Δ, centered on
/// zero and truncated to the comb bandwidth. A bin belongs to a tooth when
/// it lies within half a tooth width of the exact lattice center, so the
/// grating period is exact and individual sampled widths vary by at most one
/// bin around the true width.
pub fn square_comb<T: Real>(
    params: &CombParams<T>,
    grid: &FrequencyGrid<T>,
) -> Result<AbsorptionProfile<T>, SpectrumError> {
    check_comb_grid(params, grid)?;
    let mut profile = AbsorptionProfile::zeros(*grid);
    let res = grid.resolution();
    let half_width = params.tooth_width() / r64(2.0);
    let half_n = T::from_usize(grid.n_points() / 2).unwrap();
    let n = grid.n_points() as isize;
    let (_count, centers) = tooth_centers(params);
    for c in centers {
        let lo = num_traits::ToPrimitive::to_isize(&((c - half_width) / res + half_n).ceil())
            .unwrap_or(0)
            .max(0);
        let hi = num_traits::ToPrimitive::to_isize(&((c + half_width) / res + half_n).floor())
            .unwrap_or(0)
            .min(n - 1);
        for j in lo..=hi {
            profile.depth[j as usize] = params.peak_depth;
        }
    }
    Ok(profile)
}

/// As [`square_comb`] but with Gaussian teeth of FWHM Δ/F and peak depth d.
/// Overlapping tails add.
pub fn gaussian_comb<T: Real>(
    params: &CombParams<T>,
    grid: &FrequencyGrid<T>,
) -> Result<AbsorptionProfile<T>, SpectrumError> {
    check_comb_grid(params, grid)?;
    let mut profile = AbsorptionProfile::zeros(*grid);
    let res = grid.resolution();
    let fwhm = params.tooth_width();
    let four_ln2 = r64::<T>(4.0) * T::LN_2();
    // Beyond 5 FWHM a tooth contributes < 1e-30 of its peak.
    let reach = num_traits::ToPrimitive::to_isize(&(r64::<T>(5.0) * fwhm / res).ceil()).unwrap();
    let n = grid.n_points() as isize;
    let (_count, centers) = tooth_centers(params);
    for c in centers {
        let c_bin = grid.nearest_bin(c) as isize;
        for j in (c_bin - reach).max(0)..=(c_bin + reach).min(n - 1) {
            let x = (grid.freq(j as usize) - c) / fwhm;
            profile.depth[j as usize] += params.peak_depth * (-four_ln2 * x * x).exp();
        }
    }
    Ok(profile)
}

/// Flat absorption of depth `background` over the central 80% of the span,
/// with a fully transparent square-edged window of the given width at the
/// center. `width = 0` gives the uniform background block.
pub fn transparency_window<T: Real>(
    background: T,
    width: T,
    grid: &FrequencyGrid<T>,
) -> Result<AbsorptionProfile<T>, SpectrumError> {
    if !(background >= T::zero()) {
        return Err(SpectrumError::NegativeDepth);
    }
    if width >= grid.span() * r64(0.8) {
        return Err(SpectrumError::BandwidthExceedsGrid {
            bandwidth: as_f64(width),
            span: as_f64(grid.span()),
        });
    }
    let mut profile = AbsorptionProfile::zeros(*grid);
    let n = grid.n_points();
    // Support strictly inside the guard band, expressed in bins so the
    // guard invariant holds exactly.
    let guard = (n as f64 * GUARD_FRACTION).ceil() as usize;
    let half_window = width / r64(2.0);
    for j in guard..n - guard {
        let f = grid.freq(j).abs();
        if width == T::zero() || f >= half_window {
            profile.depth[j] = background;
        }
    }
    Ok(profile)
}

/// Causal complex transfer function of an absorption profile.
///
/// The attenuation is exact, |H| = exp(−d/2); the phase is the minimum-phase
/// partner of the attenuation, obtained by suppressing the negative-delay
/// half of the inverse-transformed log-magnitude (analytic-signal
/// construction). The guard band keeps wrap-around of the discrete transform
/// below the causality tolerance.
pub fn kramers_kronig_response<T: Real>(
    profile: &AbsorptionProfile<T>,
) -> Result<ComplexResponse<T>, SpectrumError> {
    if !profile.guard_band_ok() {
        return Err(SpectrumError::GuardBandViolation);
    }
    let n = profile.grid.n_points();
    let half = r64::<T>(0.5);
    // log-magnitude, frequency order -> FFT order.
    let mut buf: Vec<Complex<T>> = profile
        .depth
        .iter()
        .map(|d| Complex::new(-*d * half, T::zero()))
        .collect();
    half_rotate(&mut buf);
    // Delay-domain representation of log H.
    fft_inverse(&mut buf);
    // Keep zero and Nyquist bins, double positive delays, drop negative ones.
    let two = r64::<T>(2.0);
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || k == n / 2 {
            // unchanged
        } else if k < n / 2 {
            *v = v.scale(two);
        } else {
            *v = Complex::new(T::zero(), T::zero());
        }
    }
    fft_forward(&mut buf);
    half_rotate(&mut buf);
    let transfer = profile
        .depth
        .iter()
        .zip(&buf)
        .map(|(d, g)| Complex::from_polar((-*d * half).exp(), g.im))
        .collect();
    Ok(ComplexResponse {
        grid: profile.grid,
        transfer,
    })
}

/// Group delay of a response, sign convention such that a retarded (slow
/// light) response has positive delay.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDelay<T> {
    /// τ_g per grid bin, seconds.
    pub tau: Vec<T>,
    /// τ_g at the center of the grid.
    pub center: T,
    /// Set when the unwrapped phase still jumps by more than π/2 between
    /// adjacent bins, i.e. the sampling is too coarse to trust the
    /// derivative.
    pub unwrap_suspect: bool,
}

/// Central-difference group delay of the unwrapped transfer phase.
pub fn group_delay<T: Real>(response: &ComplexResponse<T>) -> GroupDelay<T> {
    let n = response.grid.n_points();
    let mut phase = Vec::with_capacity(n);
    let mut offset = T::zero();
    let mut prev = T::zero();
    let mut unwrap_suspect = false;
    let two_pi = r64::<T>(2.0) * T::PI();
    for (k, h) in response.transfer.iter().enumerate() {
        let raw = h.arg();
        if k > 0 {
            let mut step = raw + offset - prev;
            while step > T::PI() {
                offset -= two_pi;
                step -= two_pi;
            }
            while step < -T::PI() {
                offset += two_pi;
                step += two_pi;
            }
            if step.abs() > T::PI() / r64(2.0) {
                unwrap_suspect = true;
            }
        }
        let unwrapped = raw + offset;
        phase.push(unwrapped);
        prev = unwrapped;
    }
    let res = response.grid.resolution();
    let scale = -(two_pi * res).recip(); // physical delay = −dφ/dω here
    let mut tau = Vec::with_capacity(n);
    for k in 0..n {
        let d = if k == 0 {
            phase[1] - phase[0]
        } else if k == n - 1 {
            phase[n - 1] - phase[n - 2]
        } else {
            (phase[k + 1] - phase[k - 1]) / r64(2.0)
        };
        tau.push(d * scale);
    }
    let center = tau[response.grid.center_bin()];
    GroupDelay {
        tau,
        center,
        unwrap_suspect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ToothShape;

    fn grid() -> FrequencyGrid<f64> {
        FrequencyGrid::new(1 << 14, 80.0e6).unwrap()
    }

    fn comb(d: f64, spacing: f64, finesse: f64, bw: f64) -> CombParams<f64> {
        CombParams::new(d, spacing, finesse, ToothShape::Square, bw).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(1000, 80e6_f64).is_err());
        assert!(FrequencyGrid::new(512, 80e6_f64).is_err());
        assert!(FrequencyGrid::new(1 << 12, -1.0_f64).is_err());
        let g = grid();
        assert_eq!(g.freq(g.center_bin()), 0.0);
        assert_eq!(g.nearest_bin(0.0), g.center_bin());
    }

    #[test]
    fn square_comb_tooth_count_and_mean() {
        let g = FrequencyGrid::new(1 << 18, 80.0e6).unwrap();
        let p = square_comb(&comb(0.8, 100e3, 5.0, 5e6), &g).unwrap();
        // 50 teeth: count transitions from zero to nonzero.
        let mut teeth = 0;
        for j in 1..p.depth.len() {
            if p.depth[j] > 0.0 && p.depth[j - 1] == 0.0 {
                teeth += 1;
            }
        }
        assert_eq!(teeth, 50);
        let mean = p.mean_depth_over(2.5e6);
        let quant = 0.8 * g.resolution() / 100e3;
        assert!(
            (mean - 0.16).abs() <= quant + 1e-6,
            "mean {mean} vs 0.16 (quant {quant})"
        );

        let p125 = square_comb(&comb(0.8, 40e3, 5.0, 5e6), &g).unwrap();
        let mut teeth = 0;
        for j in 1..p125.depth.len() {
            if p125.depth[j] > 0.0 && p125.depth[j - 1] == 0.0 {
                teeth += 1;
            }
        }
        assert_eq!(teeth, 125);
    }

    #[test]
    fn square_comb_unit_finesse_is_flat() {
        let g = grid();
        let p = square_comb(&comb(0.7, 500e3, 1.0, 4e6), &g).unwrap();
        // Contiguous block of depth d across the comb extent.
        let inner: Vec<f64> = (0..g.n_points())
            .filter(|&j| g.freq(j).abs() < 1.9e6)
            .map(|j| p.depth[j])
            .collect();
        assert!(inner.iter().all(|&d| d == 0.7));
    }

    #[test]
    fn square_comb_grid_errors() {
        let g = FrequencyGrid::new(1 << 10, 80.0e6).unwrap(); // res 78 kHz
        let err = square_comb(&comb(0.8, 100e3, 5.0, 5e6), &g).unwrap_err();
        assert!(matches!(err, SpectrumError::ResolutionTooCoarse { .. }));
        let g = grid();
        let err = square_comb(&comb(0.8, 500e3, 5.0, 70e6), &g).unwrap_err();
        assert!(matches!(err, SpectrumError::BandwidthExceedsGrid { .. }));
    }

    #[test]
    fn gaussian_tooth_area_matches_quadrature() {
        let g = FrequencyGrid::new(1 << 16, 80.0e6).unwrap();
        // Single isolated tooth: one spacing worth of bandwidth.
        let params = CombParams::new(0.8, 1e6, 8.0, ToothShape::Gaussian, 1e6).unwrap();
        let p = gaussian_comb(&params, &g).unwrap();
        let area: f64 = p.depth.iter().sum::<f64>() * g.resolution();
        let expected = 0.8 * params.tooth_width() * (std::f64::consts::PI / (4.0 * 2.0f64.ln())).sqrt();
        assert!(
            ((area - expected) / expected).abs() < 1e-6,
            "area {area} vs {expected}"
        );
        // Same tooth, square shape: areas differ by the Gaussian area factor.
        let sq = CombParams::new(0.8, 1e6, 8.0, ToothShape::Square, 1e6).unwrap();
        let ps = square_comb(&sq, &g).unwrap();
        let area_sq: f64 = ps.depth.iter().sum::<f64>() * g.resolution();
        let ratio = area / area_sq;
        assert!((ratio - 1.0645).abs() < 0.01, "ratio {ratio}");
        // Isolated Gaussian peaks reach the full depth.
        let peak = p.depth.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 0.8).abs() < 1e-9);
    }

    #[test]
    fn transparency_window_shapes() {
        let g = grid();
        let uniform = transparency_window(1.2, 0.0, &g).unwrap();
        let inner: Vec<f64> = (0..g.n_points())
            .filter(|&j| g.freq(j).abs() < 0.39 * g.span())
            .map(|j| uniform.depth[j])
            .collect();
        assert!(inner.iter().all(|&d| d == 1.2));

        let windowed = transparency_window(1.2, 15e6, &g).unwrap();
        let hole_sum: f64 = (0..g.n_points())
            .filter(|&j| g.freq(j).abs() < 7.4e6)
            .map(|j| windowed.depth[j])
            .sum();
        assert_eq!(hole_sum, 0.0);
        assert!(windowed.guard_band_ok());
        assert!(transparency_window(1.2, 70e6, &g).is_err());
    }

    #[test]
    fn kk_of_zero_profile_is_unity() {
        let g = FrequencyGrid::new(1 << 12, 80.0e6_f64).unwrap();
        let p = AbsorptionProfile::new(g, vec![0.0; g.n_points()]).unwrap();
        let r = kramers_kronig_response(&p).unwrap();
        for h in &r.transfer {
            assert!((h.re - 1.0).abs() < 1e-12 && h.im.abs() < 1e-12);
        }
    }

    #[test]
    fn kk_phase_antisymmetric_for_symmetric_profile() {
        let g = FrequencyGrid::new(1 << 14, 80.0e6).unwrap();
        let p = square_comb(&comb(0.8, 500e3, 4.0, 4e6), &g).unwrap();
        // Symmetrize exactly (tooth rasterization is already symmetric, this
        // guards against off-by-one drift).
        let r = kramers_kronig_response(&p).unwrap();
        let n = g.n_points();
        for k in 1..n / 2 {
            let a = r.transfer[n / 2 + k].arg();
            let b = r.transfer[n / 2 - k].arg();
            assert!((a + b).abs() < 1e-8, "phase not antisymmetric at {k}");
        }
    }

    #[test]
    fn kk_requires_guard_band() {
        let g = FrequencyGrid::new(1 << 12, 80.0e6).unwrap();
        let mut depth = vec![0.0; g.n_points()];
        depth[0] = 1.0;
        let p = AbsorptionProfile::new(g, depth).unwrap();
        assert!(matches!(
            kramers_kronig_response(&p).unwrap_err(),
            SpectrumError::GuardBandViolation
        ));
    }

    #[test]
    fn passivity_of_comb_response() {
        let g = FrequencyGrid::new(1 << 14, 80.0e6).unwrap();
        let p = square_comb(&comb(2.0, 250e3, 3.0, 5e6), &g).unwrap();
        let r = kramers_kronig_response(&p).unwrap();
        for h in &r.transfer {
            assert!(h.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn group_delay_flat_response_is_zero() {
        let g = FrequencyGrid::new(1 << 12, 80.0e6_f64).unwrap();
        let r = ComplexResponse::identity(g);
        let gd = group_delay(&r);
        assert!(gd.tau.iter().all(|t| t.abs() < 1e-18));
        assert!(!gd.unwrap_suspect);
    }

    #[test]
    fn group_delay_positive_in_transparency_window() {
        let g = FrequencyGrid::new(1 << 16, 200.0e6_f64).unwrap();
        let p = transparency_window(0.8, 15e6, &g).unwrap();
        let r = kramers_kronig_response(&p).unwrap();
        let gd = group_delay(&r);
        assert!(gd.center > 0.0, "center delay {}", gd.center);
        // Halving the window roughly doubles the center delay.
        let p2 = transparency_window(0.8, 7.5e6, &g).unwrap();
        let gd2 = group_delay(&kramers_kronig_response(&p2).unwrap());
        let ratio = gd2.center / gd.center;
        assert!((ratio - 2.0).abs() < 0.4, "scaling ratio {ratio}");
    }
}
