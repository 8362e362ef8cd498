//! Excited two-level atom near a dielectric half space: body-induced level
//! shift and width, the resonant and off-resonant force components, and the
//! time evolution of the upper state in the weak and strong coupling limits.
//!
//! All results are nonretarded (z_A ≪ 1/ω₁₀).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::casimir::Trap;
use crate::error::{require, Error, Result};
use crate::material::MaterialModel;
use crate::quadrature::{integrate_semiinf, QuadSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelNearHalfSpace {
    /// Bare transition frequency ω₁₀.
    pub omega10: f64,
    /// D = |d₀₁|² + (d₀₁·e_z)².
    pub dipole_weight: f64,
    pub material: MaterialModel,
    pub z: f64,
}

impl TwoLevelNearHalfSpace {
    pub fn new(omega10: f64, dipole_weight: f64, material: MaterialModel, z: f64) -> Result<Self> {
        let s = Self {
            omega10,
            dipole_weight,
            material,
            z,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.omega10 > 0.0 && self.omega10.is_finite(), || {
            format!("transition frequency must be positive, got {}", self.omega10)
        })?;
        require(self.dipole_weight >= 0.0 && self.dipole_weight.is_finite(), || {
            format!("dipole weight must be non-negative, got {}", self.dipole_weight)
        })?;
        require(self.z > 0.0 && self.z.is_finite(), || {
            format!("atom position must be positive, got {}", self.z)
        })?;
        self.material.validate()?;
        if self.material.is_ideal() {
            return Err(Error::UnsupportedModel(self.material.name()));
        }
        Ok(())
    }

    pub fn with_omega10(&self, omega10: f64) -> Self {
        Self { omega10, ..*self }
    }

    /// Whether z_A ω < 0.1 for the atomic and all medium frequencies.
    pub fn nonretarded_valid(&self) -> bool {
        let top = self
            .material
            .characteristic_frequencies()
            .into_iter()
            .fold(self.omega10, f64::max);
        self.z * top < 0.1
    }

    fn eps(&self, omega: Complex64) -> Result<Complex64> {
        self.material.epsilon_complex(omega)
    }

    fn shift_map(&self, delta: f64) -> Result<f64> {
        let e = self.eps(Complex64::new(self.omega10 + delta, 0.0))?;
        Ok(-self.dipole_weight / (32.0 * PI * self.z.powi(3)) * (e.norm_sqr() - 1.0) / (e + 1.0).norm_sqr())
    }
}

/// Self-consistent transition shift δω; iteration stops when the residual
/// falls below `tol·ω₁₀`.
pub fn solve_shift(sys: &TwoLevelNearHalfSpace, tol: f64, max_iter: usize) -> Result<f64> {
    sys.validate()?;
    require(tol > 0.0, || format!("tolerance must be positive, got {tol}"))?;
    let mut delta = 0.0;
    let mut last_residual = 0.0f64;
    for k in 0..max_iter {
        let residual = sys.shift_map(delta)? - delta;
        if !residual.is_finite() {
            return Err(Error::Iteration {
                iterations: k,
                residual,
            });
        }
        if residual.abs() < tol * sys.omega10 {
            return Ok(delta + residual);
        }
        let damping = if residual * last_residual < 0.0 { 0.5 } else { 1.0 };
        delta += damping * residual;
        last_residual = residual;
    }
    let residual = sys.shift_map(delta)? - delta;
    Err(Error::Iteration {
        iterations: max_iter,
        residual,
    })
}

/// Shift with the default tolerance 10⁻¹⁰ and 200 iterations.
pub fn shift(sys: &TwoLevelNearHalfSpace) -> Result<f64> {
    solve_shift(sys, 1e-10, 200)
}

/// Γ at the shifted frequency ω₁₀ + δω.
pub fn width(sys: &TwoLevelNearHalfSpace, delta: f64) -> Result<f64> {
    sys.validate()?;
    let e = sys.eps(Complex64::new(sys.omega10 + delta, 0.0))?;
    Ok(sys.dipole_weight / (8.0 * PI * sys.z.powi(3)) * e.im / (e + 1.0).norm_sqr())
}

/// Shift and width solved together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dressed {
    pub shift: f64,
    pub width: f64,
}

pub fn dress(sys: &TwoLevelNearHalfSpace) -> Result<Dressed> {
    let shift = shift(sys)?;
    Ok(Dressed {
        shift,
        width: width(sys, shift)?,
    })
}

/// Resonant force for given shift and width; negative values attract.
pub fn resonant_force_at(sys: &TwoLevelNearHalfSpace, dressed: Dressed) -> Result<f64> {
    sys.validate()?;
    let omega = Complex64::new(sys.omega10 + dressed.shift, dressed.width / 2.0);
    let e = sys.eps(omega)?;
    Ok(-3.0 * sys.dipole_weight / (32.0 * PI * sys.z.powi(4)) * (e.norm_sqr() - 1.0) / (e + 1.0).norm_sqr())
}

/// Resonant force with the self-consistent shift and width.
pub fn resonant_force(sys: &TwoLevelNearHalfSpace) -> Result<f64> {
    resonant_force_at(sys, dress(sys)?)
}

/// Resonant force of perturbation theory (no shift, no broadening).
pub fn resonant_force_perturbative(sys: &TwoLevelNearHalfSpace) -> Result<f64> {
    resonant_force_at(sys, Dressed { shift: 0.0, width: 0.0 })
}

/// Off-resonant force for given shift and width.
pub fn offresonant_force_at(sys: &TwoLevelNearHalfSpace, dressed: Dressed, spec: &QuadSpec) -> Result<f64> {
    sys.validate()?;
    let w = sys.omega10 + dressed.shift;
    let g = dressed.width / 2.0;
    let w2 = w * w;
    let trap = Trap::default();
    let integrand = |xi: f64| {
        let e = trap.catch(sys.material.epsilon_ixi(xi));
        (e - 1.0) / (e + 1.0) * w / (w2 + (xi + g).powi(2)) * (w2 + xi * xi + g * g) / (w2 + (xi - g).powi(2))
    };
    let r = integrate_semiinf(integrand, &spec.with_scale(w));
    trap.check()?;
    r.scaled(3.0 * sys.dipole_weight / (32.0 * PI * PI * sys.z.powi(4))).into_result()
}

pub fn offresonant_force(sys: &TwoLevelNearHalfSpace, spec: &QuadSpec) -> Result<f64> {
    offresonant_force_at(sys, dress(sys)?, spec)
}

pub fn offresonant_force_perturbative(sys: &TwoLevelNearHalfSpace, spec: &QuadSpec) -> Result<f64> {
    offresonant_force_at(sys, Dressed { shift: 0.0, width: 0.0 }, spec)
}

/// ω_S = √(ω_T² + ω_P²/2) of a Drude–Lorentz permittivity.
pub fn surface_plasmon_frequency(material: &MaterialModel) -> Result<f64> {
    match material {
        MaterialModel::DrudeLorentz { permittivity: p, .. } => {
            Ok((p.resonance_frequency.powi(2) + p.plasma_frequency.powi(2) / 2.0).sqrt())
        }
        other => Err(Error::UnsupportedModel(other.name())),
    }
}

/// A Lorentzian field resonance coupled to the atomic transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiMode {
    pub omega_nu: f64,
    pub gamma_nu: f64,
    pub rabi: f64,
    /// Width Γ₁′ due to the residual field.
    pub residual_width: f64,
    /// Shift δω₁′ due to the residual field.
    pub residual_shift: f64,
    /// Bare ω₁₀; the detuning is Δω = ω_ν − (ω₁₀ + δω₁′).
    pub transition_frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Weak,
    Strong,
    Intermediate,
}

/// Margin standing in for ≫ and ≪ in the regime conditions.
pub const REGIME_MARGIN: f64 = 10.0;

/// Exponents and amplitudes of φ₁(t) = c₊e^{Ω₊t} + c₋e^{Ω₋t}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRoots {
    pub plus: Complex64,
    pub minus: Complex64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// Ω₊ = Ω₋; φ₁ = (1 − Ω₊t)e^{Ω₊t}.
    pub degenerate: bool,
}

impl QuasiMode {
    pub fn validate(&self) -> Result<()> {
        require(self.gamma_nu >= 0.0 && self.gamma_nu.is_finite(), || {
            format!("mode linewidth must be non-negative, got {}", self.gamma_nu)
        })?;
        require(self.rabi >= 0.0 && self.rabi.is_finite(), || {
            format!("Rabi frequency must be non-negative, got {}", self.rabi)
        })?;
        require(self.residual_width >= 0.0 && self.residual_width.is_finite(), || {
            format!("residual width must be non-negative, got {}", self.residual_width)
        })?;
        require(self.omega_nu.is_finite() && self.residual_shift.is_finite() && self.transition_frequency.is_finite(), || {
            "mode frequencies must be finite".into()
        })
    }

    pub fn detuning(&self) -> f64 {
        self.omega_nu - (self.transition_frequency + self.residual_shift)
    }

    /// B = iΔω + (γ_ν − Γ₁′)/2, the damping coefficient of φ₁.
    fn damping(&self) -> Complex64 {
        Complex64::new((self.gamma_nu - self.residual_width) / 2.0, self.detuning())
    }

    pub fn regime(&self) -> Regime {
        let (g, r, d) = (self.gamma_nu, self.rabi, self.detuning().abs());
        let flat = g > REGIME_MARGIN * 2.0 * r;
        let detuned = d > REGIME_MARGIN * 2.0 * r * r / g;
        if flat || detuned {
            Regime::Weak
        } else if g <= 2.0 * r && d * REGIME_MARGIN < 2.0 * r * r / g {
            Regime::Strong
        } else {
            Regime::Intermediate
        }
    }

    pub fn roots(&self) -> ModeRoots {
        let b = self.damping();
        let mut s = (b * b - self.rabi * self.rabi).sqrt();
        if s.re > 0.0 {
            s = -s;
        }
        let plus = -b / 2.0 - s / 2.0;
        let minus = -b / 2.0 + s / 2.0;
        let scale = b.norm().max(self.rabi);
        if s.norm() <= 1e-12 * scale {
            return ModeRoots {
                plus,
                minus: plus,
                c_plus: Complex64::new(1.0, 0.0),
                c_minus: Complex64::new(0.0, 0.0),
                degenerate: true,
            };
        }
        ModeRoots {
            plus,
            minus,
            c_plus: minus / (minus - plus),
            c_minus: plus / (plus - minus),
            degenerate: false,
        }
    }

    /// The slow root in the weak-coupling expansion.
    pub fn taylor_slow_root(&self) -> Complex64 {
        let d = self.detuning();
        let g = self.gamma_nu;
        let den = d * d + g * g / 4.0;
        let r2 = self.rabi * self.rabi;
        Complex64::new(-r2 / 8.0 * g / den, r2 / 4.0 * d / den)
    }

    /// Oscillation frequency Ω of the strong-coupling envelope; its square
    /// is negative past critical damping.
    pub fn envelope_frequency_sq(&self) -> f64 {
        let d = self.detuning();
        let k = (self.gamma_nu - self.residual_width) / 2.0;
        self.rabi * self.rabi + d * d - k * k
    }

    pub fn phi(&self, roots: &ModeRoots, t: f64) -> Complex64 {
        if roots.degenerate {
            (1.0 - roots.plus * t) * (roots.plus * t).exp()
        } else {
            roots.c_plus * (roots.plus * t).exp() + roots.c_minus * (roots.minus * t).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    /// Times measured from the preparation instant t₀.
    pub times: Vec<f64>,
    pub population: Vec<f64>,
    pub force_scale: Vec<f64>,
    /// force_scale × F₁.
    pub force: Vec<f64>,
    pub regime: Regime,
    /// Set when the parameters do not satisfy the conditions of `regime`.
    pub regime_warning: bool,
}

/// Weak coupling: both population and force decay as e^{−Γt}.
pub fn evolve_weak(f1: f64, gamma: f64, times: &[f64]) -> Result<EvolutionResult> {
    require(gamma >= 0.0 && gamma.is_finite(), || format!("decay rate must be non-negative, got {gamma}"))?;
    let scale: Vec<f64> = times.iter().map(|&t| (-gamma * t).exp()).collect();
    Ok(EvolutionResult {
        times: times.to_vec(),
        population: scale.clone(),
        force: scale.iter().map(|s| s * f1).collect(),
        force_scale: scale,
        regime: Regime::Weak,
        regime_warning: false,
    })
}

/// Strong coupling: exact upper-state population from Ω±, force envelope
/// 2e^{−(γ_ν+Γ₁′)t/2} sin²(Ωt/2) times the detuning factor.
pub fn evolve_strong(mode: &QuasiMode, f1: f64, times: &[f64]) -> Result<EvolutionResult> {
    mode.validate()?;
    let roots = mode.roots();
    let d = mode.detuning();
    let k2 = ((mode.gamma_nu - mode.residual_width) / 2.0).powi(2);
    let omega_sq = mode.envelope_frequency_sq();
    let factor = if omega_sq != 0.0 { (d * d - k2) / omega_sq } else { 0.0 };
    let decay = (mode.gamma_nu + mode.residual_width) / 2.0;
    let osc = |t: f64| {
        if omega_sq >= 0.0 {
            (omega_sq.sqrt() * t / 2.0).sin().powi(2)
        } else {
            -((-omega_sq).sqrt() * t / 2.0).sinh().powi(2)
        }
    };
    let population = times
        .iter()
        .map(|&t| (-mode.residual_width * t).exp() * mode.phi(&roots, t).norm_sqr())
        .collect();
    let scale: Vec<f64> = times
        .iter()
        .map(|&t| 2.0 * (-decay * t).exp() * osc(t) * factor)
        .collect();
    Ok(EvolutionResult {
        times: times.to_vec(),
        population,
        force: scale.iter().map(|s| s * f1).collect(),
        force_scale: scale,
        regime: Regime::Strong,
        regime_warning: mode.regime() != Regime::Strong,
    })
}
