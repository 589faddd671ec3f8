//! Closed-form atomic-frequency-comb efficiency theory.
//!
//! Single-pass and impedance-matched-cavity echo efficiencies, the optimal
//! comb finesse, spin dephasing and the spin-wave efficiency budget, all as
//! pure stateless functions. Safe to call concurrently from any number of
//! threads.
//!
//! Conventions: `sinc` is unnormalized, `sinc(x) = sin(x)/x`. All frequency
//! arguments are ordinary frequencies in Hz (not angular); durations are in
//! seconds; optical depths are dimensionless exponents.

use thiserror::Error;

use crate::float::{as_f64, r64, Real};

/// Domain violations of the closed-form theory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("{name} must be {constraint} (got {value})")]
    Domain {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
}

fn domain<T: Real>(name: &'static str, constraint: &'static str, value: T) -> AnalyticError {
    AnalyticError::Domain {
        name,
        constraint,
        value: as_f64(value),
    }
}

/// A computed value plus a flag telling whether the inputs were inside the
/// stated validity regime of the formula. Sweep tooling needs total
/// functions, so out-of-regime inputs are computed anyway and flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub in_regime: bool,
}

/// Tooth profile of a prepared comb. Square teeth are the default everywhere;
/// they give the better dephasing factor at fixed finesse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToothShape {
    Square,
    Gaussian,
}

/// Parameters of an idealized prepared comb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombParams<T> {
    /// Peak optical depth `d` at a tooth center.
    pub peak_depth: T,
    /// Tooth spacing Δ in Hz; the echo is re-emitted after 1/Δ.
    pub tooth_spacing: T,
    /// Comb finesse F = Δ/γ, tooth spacing over tooth width.
    pub finesse: T,
    pub tooth_shape: ToothShape,
    /// Total width of the comb structure in Hz.
    pub total_bandwidth: T,
}

impl<T: Real> CombParams<T> {
    pub fn new(
        peak_depth: T,
        tooth_spacing: T,
        finesse: T,
        tooth_shape: ToothShape,
        total_bandwidth: T,
    ) -> Result<Self, AnalyticError> {
        let p = Self {
            peak_depth,
            tooth_spacing,
            finesse,
            tooth_shape,
            total_bandwidth,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        if !(self.peak_depth >= T::zero()) {
            return Err(domain("peak_depth", ">= 0", self.peak_depth));
        }
        if !(self.finesse >= T::one()) {
            return Err(domain("finesse", ">= 1", self.finesse));
        }
        if !(self.tooth_spacing > T::zero()) {
            return Err(domain("tooth_spacing", "> 0", self.tooth_spacing));
        }
        if !(self.total_bandwidth >= self.tooth_spacing) {
            return Err(domain(
                "total_bandwidth",
                ">= tooth_spacing",
                self.total_bandwidth,
            ));
        }
        Ok(())
    }

    /// Tooth width γ = Δ/F in Hz.
    pub fn tooth_width(&self) -> T {
        self.tooth_spacing / self.finesse
    }

    /// Echo delay 1/Δ in seconds.
    pub fn echo_delay(&self) -> T {
        T::one() / self.tooth_spacing
    }

    /// Average optical depth d̃ over one comb period.
    ///
    /// For square teeth d̃ = d/F; a Gaussian tooth of the same FWHM carries
    /// √(π/(4 ln 2)) ≈ 1.064 times more area.
    pub fn avg_depth(&self) -> T {
        let base = self.peak_depth / self.finesse;
        match self.tooth_shape {
            ToothShape::Square => base,
            ToothShape::Gaussian => base * gaussian_area_factor::<T>(),
        }
    }
}

/// √(π/(4 ln 2)): area of a unit-height, unit-FWHM Gaussian.
pub fn gaussian_area_factor<T: Real>() -> T {
    (T::PI() / (r64::<T>(4.0) * T::LN_2())).sqrt()
}

/// Inhomogeneous spin line of the ground-state transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinLineshape {
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams<T> {
    /// FWHM of the inhomogeneous spin line in Hz.
    pub gamma_spin: T,
    pub lineshape: SpinLineshape,
}

impl<T: Real> SpinParams<T> {
    pub fn new(gamma_spin: T) -> Result<Self, AnalyticError> {
        if !(gamma_spin >= T::zero()) {
            return Err(domain("gamma_spin", ">= 0", gamma_spin));
        }
        Ok(Self {
            gamma_spin,
            lineshape: SpinLineshape::Gaussian,
        })
    }
}

/// Static optical properties of the storage crystal.
///
/// Validity note: the theory assumes the inhomogeneous broadening dominates
/// the homogeneous linewidth (`inhom_broadening >> homog_linewidth`); this is
/// documented rather than asserted so that exploratory sweeps stay total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams<T> {
    /// Peak absorption coefficient α in 1/cm.
    pub alpha: T,
    /// Crystal length L in cm.
    pub length: T,
    /// Inhomogeneous broadening of the optical line in Hz.
    pub inhom_broadening: T,
    /// Homogeneous linewidth in Hz.
    pub homog_linewidth: T,
    /// Control-transition offset f₊ − f₀ in Hz.
    pub lambda_plus_offset: T,
    /// Repump-transition offset f₋ − f₀ in Hz.
    pub lambda_minus_offset: T,
}

impl<T: Real> MaterialParams<T> {
    /// The europium crystal this simulator is parameterized around.
    pub fn europium() -> Self {
        Self {
            alpha: r64(1.2),
            length: T::one(),
            inhom_broadening: r64(650.0e6),
            homog_linewidth: T::zero(),
            lambda_plus_offset: r64(90.0e6),
            lambda_minus_offset: r64(-51.0e6),
        }
    }

    /// Peak optical depth d = αL.
    pub fn optical_depth(&self) -> T {
        self.alpha * self.length
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        if !(self.alpha * self.length >= T::zero()) {
            return Err(domain("alpha*length", ">= 0", self.alpha * self.length));
        }
        Ok(())
    }
}

/// Unnormalized sinc with the removable singularity evaluated.
fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        x.sin() / x
    }
}

/// Dephasing factor of a square-tooth comb, sinc²(π/F).
///
/// Monotone increasing in the finesse; tends to 1 as F → ∞.
pub fn eta_deph_square<T: Real>(finesse: T) -> Result<T, AnalyticError> {
    if !(finesse >= T::one()) {
        return Err(domain("finesse", ">= 1", finesse));
    }
    let s = sinc(T::PI() / finesse);
    Ok(s * s)
}

/// Dephasing factor of a Gaussian-tooth comb, exp(−π²/(2 ln 2) / F²).
///
/// This is the squared magnitude of the Fourier transform of one normalized
/// Gaussian tooth (FWHM Δ/F) evaluated at the echo delay 1/Δ.
pub fn eta_deph_gaussian<T: Real>(finesse: T) -> Result<T, AnalyticError> {
    if !(finesse >= T::one()) {
        return Err(domain("finesse", ">= 1", finesse));
    }
    let two = r64::<T>(2.0);
    let c = T::PI() * T::PI() / (two * T::LN_2());
    Ok((-c / (finesse * finesse)).exp())
}

/// Forward-mode single-pass echo efficiency, d̃² exp(−d̃) η_deph(F).
///
/// The exp(−d̃) factor is re-absorption of the echo, which bounds the
/// single-pass efficiency by 4e⁻² ≈ 54% of η_deph (maximum at d̃ = 2).
pub fn eta_single_pass<T: Real>(d_tilde: T, finesse: T) -> Result<T, AnalyticError> {
    if !(d_tilde >= T::zero()) {
        return Err(domain("d_tilde", ">= 0", d_tilde));
    }
    let deph = eta_deph_square(finesse)?;
    Ok(d_tilde * d_tilde * (-d_tilde).exp() * deph)
}

/// Finesse maximizing the single-pass efficiency at fixed peak depth,
/// F_opt = π / arctan(2π/d) for square teeth.
pub fn optimal_finesse<T: Real>(peak_depth: T) -> Result<T, AnalyticError> {
    if !(peak_depth > T::zero()) {
        return Err(domain("peak_depth", "> 0", peak_depth));
    }
    let two_pi = r64::<T>(2.0) * T::PI();
    Ok(T::PI() / (two_pi / peak_depth).atan())
}

/// Front-mirror power reflectivity achieving impedance match for a given
/// average depth: R = exp(−2 d̃).
pub fn impedance_match_reflectivity<T: Real>(d_tilde: T) -> Result<T, AnalyticError> {
    if !(d_tilde >= T::zero()) {
        return Err(domain("d_tilde", ">= 0", d_tilde));
    }
    Ok((-(d_tilde + d_tilde)).exp())
}

/// Inverse of [`impedance_match_reflectivity`]: d̃ = −ln(R)/2.
pub fn impedance_match_depth<T: Real>(reflectivity: T) -> Result<T, AnalyticError> {
    if !(reflectivity > T::zero() && reflectivity <= T::one()) {
        return Err(domain("reflectivity", "in (0, 1]", reflectivity));
    }
    Ok(-reflectivity.ln() / r64(2.0))
}

/// Finite-depth correction of the impedance-matched cavity efficiency,
/// d̃²/sinh²(d̃), with the removable singularity at d̃ = 0 evaluating to 1.
pub fn eta_cavity_finite_depth<T: Real>(d_tilde: T) -> Result<T, AnalyticError> {
    if !(d_tilde >= T::zero()) {
        return Err(domain("d_tilde", ">= 0", d_tilde));
    }
    if d_tilde == T::zero() {
        return Ok(T::one());
    }
    let q = d_tilde / d_tilde.sinh();
    Ok(q * q)
}

/// Loss penalty of the impedance-matched cavity, (1 + ε/(4 d̃))⁻⁴, for a
/// lumped round-trip intracavity power loss ε.
///
/// The formula is derived for ε ≪ d̃ ≪ 1; inputs outside that regime are
/// computed anyway and flagged (`in_regime = false`). The regime test used
/// here is ε ≤ d̃/2 and d̃ ≤ 0.5.
pub fn eta_cavity_loss<T: Real>(d_tilde: T, epsilon: T) -> Result<Flagged<T>, AnalyticError> {
    if !(d_tilde >= T::zero()) {
        return Err(domain("d_tilde", ">= 0", d_tilde));
    }
    if !(epsilon >= T::zero()) {
        return Err(domain("epsilon", ">= 0", epsilon));
    }
    if epsilon == T::zero() {
        return Ok(Flagged {
            value: T::one(),
            in_regime: d_tilde <= r64(0.5),
        });
    }
    if d_tilde == T::zero() {
        return Err(domain("d_tilde", "> 0 when epsilon > 0", d_tilde));
    }
    let four = r64::<T>(4.0);
    let base = T::one() + epsilon / (four * d_tilde);
    let value = (base * base * base * base).recip();
    let in_regime = epsilon <= d_tilde / r64(2.0) && d_tilde <= r64(0.5);
    Ok(Flagged { value, in_regime })
}

/// Full impedance-matched cavity echo efficiency at peak depth `d`, finesse
/// `F` and round-trip loss ε: η_deph(F) · d̃²/sinh²(d̃) · (1 + ε/(4d̃))⁻⁴
/// with d̃ = d/F.
pub fn eta_cavity_ceiling<T: Real>(
    peak_depth: T,
    finesse: T,
    epsilon: T,
) -> Result<Flagged<T>, AnalyticError> {
    let d_tilde = peak_depth / finesse;
    let deph = eta_deph_square(finesse)?;
    let depth = eta_cavity_finite_depth(d_tilde)?;
    let loss = eta_cavity_loss(d_tilde, epsilon)?;
    Ok(Flagged {
        value: deph * depth * loss.value,
        in_regime: loss.in_regime,
    })
}

/// Spin inhomogeneous-dephasing survival factor after a spin-wave storage
/// time `t_sw`: exp(−γ² T² π²/(2 ln 2)) for a Gaussian spin line of FWHM γ.
pub fn eta_spin_dephasing<T: Real>(spin: &SpinParams<T>, t_sw: T) -> Result<T, AnalyticError> {
    if !(t_sw >= T::zero()) {
        return Err(domain("t_sw", ">= 0", t_sw));
    }
    match spin.lineshape {
        SpinLineshape::Gaussian => {
            let gt = spin.gamma_spin * t_sw;
            let c = T::PI() * T::PI() / (r64::<T>(2.0) * T::LN_2());
            Ok((-(gt * gt) * c).exp())
        }
    }
}

/// Decomposition of a full spin-wave memory run,
/// η_total = η_2L · η_T² · η_sw · overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyBudget<T> {
    /// Two-level echo efficiency.
    pub eta_2l: T,
    /// Transfer efficiency of one control pulse (applied twice).
    pub eta_t: T,
    /// Spin dephasing survival factor.
    pub eta_sw: T,
    /// Scalar stand-in for the spatial mode overlap between control and
    /// storage beams. Defaults to 1.
    pub overlap: T,
    pub eta_total: T,
    /// True when η_2L came out of a simulation rather than a supplied value.
    pub eta_2l_simulated: bool,
    /// True when η_T came out of the Bloch integrator rather than a supplied
    /// value.
    pub eta_t_simulated: bool,
}

/// Assemble the spin-wave efficiency budget. Every factor must lie in [0, 1].
pub fn total_budget<T: Real>(
    eta_2l: T,
    eta_t: T,
    eta_sw: T,
    overlap: T,
) -> Result<EfficiencyBudget<T>, AnalyticError> {
    for (name, v) in [
        ("eta_2l", eta_2l),
        ("eta_t", eta_t),
        ("eta_sw", eta_sw),
        ("overlap", overlap),
    ] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(domain(name, "in [0, 1]", v));
        }
    }
    Ok(EfficiencyBudget {
        eta_2l,
        eta_t,
        eta_sw,
        overlap,
        eta_total: eta_2l * eta_t * eta_t * eta_sw * overlap,
        eta_2l_simulated: false,
        eta_t_simulated: false,
    })
}
