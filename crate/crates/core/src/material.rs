//! Electric and magnetic response models.
//!
//! Natural units throughout (ħ = c = ε₀ = μ₀ = 1). Frequencies are in units of
//! a reference frequency chosen by the caller, lengths in c over that frequency.

use num_complex::Complex64;

use crate::error::{require, Error, Result};

/// Single-resonance Drude–Lorentz response
/// χ(ω) = ω_P² / (ω_T² − ω² − iγω).
///
/// `resonance_frequency = 0` gives a Drude metal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeLorentzParams {
    pub plasma_frequency: f64,
    pub resonance_frequency: f64,
    pub damping: f64,
}

/// How the ξ = 0 limit of a Drude metal (ω_T = 0) is taken.
///
/// With finite damping ε(iξ)ξ² → 0; the plasma prescription drops the damping
/// first, so ε(iξ)ξ² → ω_P². Only the exact ξ = 0 point (the n = 0 Matsubara
/// term) is affected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroFrequency {
    #[default]
    Drude,
    Plasma,
}

impl DrudeLorentzParams {
    pub fn new(plasma_frequency: f64, resonance_frequency: f64, damping: f64) -> Result<Self> {
        let p = Self {
            plasma_frequency,
            resonance_frequency,
            damping,
        };
        p.validate()?;
        Ok(p)
    }

    /// A response that is identically zero.
    pub const fn none() -> Self {
        Self {
            plasma_frequency: 0.0,
            resonance_frequency: 1.0,
            damping: 0.0,
        }
    }

    /// Parameters with the given static value 1 + ω_P²/ω_T².
    pub fn with_static_value(static_value: f64, resonance_frequency: f64, damping: f64) -> Result<Self> {
        require(static_value >= 1.0, || {
            format!("static response must be at least 1, got {static_value}")
        })?;
        require(resonance_frequency > 0.0, || {
            "a static value needs a positive resonance frequency".into()
        })?;
        Self::new(
            resonance_frequency * (static_value - 1.0).sqrt(),
            resonance_frequency,
            damping,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        require(
            ok(self.plasma_frequency) && ok(self.resonance_frequency) && ok(self.damping),
            || format!("Drude-Lorentz parameters must be finite and non-negative: {self:?}"),
        )
    }

    pub fn is_trivial(&self) -> bool {
        self.plasma_frequency == 0.0
    }

    pub fn is_metallic(&self) -> bool {
        !self.is_trivial() && self.resonance_frequency == 0.0
    }

    /// χ(iξ); infinite for a Drude metal at ξ = 0.
    pub fn susceptibility_ixi(&self, xi: f64) -> f64 {
        if self.is_trivial() {
            return 0.0;
        }
        let wt = self.resonance_frequency;
        let den = wt * wt + xi * xi + self.damping * xi;
        if den == 0.0 {
            f64::INFINITY
        } else {
            self.plasma_frequency * self.plasma_frequency / den
        }
    }

    /// χ(iξ)·ξ², finite at ξ = 0 for a Drude metal.
    pub fn susceptibility_xi2(&self, xi: f64, zero: ZeroFrequency) -> f64 {
        if self.is_trivial() {
            return 0.0;
        }
        let wp2 = self.plasma_frequency * self.plasma_frequency;
        if xi == 0.0 {
            if self.resonance_frequency > 0.0 {
                return 0.0;
            }
            return match zero {
                ZeroFrequency::Plasma => wp2,
                ZeroFrequency::Drude if self.damping == 0.0 => wp2,
                ZeroFrequency::Drude => 0.0,
            };
        }
        let wt = self.resonance_frequency;
        wp2 * xi * xi / (wt * wt + xi * xi + self.damping * xi)
    }

    /// χ(ω) at complex frequency.
    pub fn susceptibility(&self, omega: Complex64) -> Complex64 {
        if self.is_trivial() {
            return Complex64::new(0.0, 0.0);
        }
        let wt2 = self.resonance_frequency * self.resonance_frequency;
        let i = Complex64::i();
        let den = wt2 - omega * omega - i * self.damping * omega;
        self.plasma_frequency * self.plasma_frequency / den
    }

    pub fn static_value(&self) -> f64 {
        1.0 + self.susceptibility_ixi(0.0)
    }
}

/// Magneto-electric response of one homogeneous region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaterialModel {
    Vacuum,
    ConstantStatic { eps: f64, mu: f64 },
    DrudeLorentz {
        permittivity: DrudeLorentzParams,
        permeability: DrudeLorentzParams,
    },
    PerfectConductor,
    PerfectlyPermeable,
}

/// Response of a medium at one imaginary frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub eps: f64,
    pub mu: f64,
    /// ε(iξ)μ(iξ)ξ², the square of the medium wavenumber on the imaginary axis.
    pub k2: f64,
}

impl Response {
    pub const VACUUM_AT_ZERO: Response = Response {
        eps: 1.0,
        mu: 1.0,
        k2: 0.0,
    };

    /// b = √(εμξ² + q²).
    pub fn propagation(&self, q: f64) -> f64 {
        (self.k2 + q * q).sqrt()
    }

    /// Refractive index √(εμ).
    pub fn index(&self) -> f64 {
        (self.eps * self.mu).sqrt()
    }
}

impl MaterialModel {
    pub fn constant(eps: f64, mu: f64) -> Result<Self> {
        let m = MaterialModel::ConstantStatic { eps, mu };
        m.validate()?;
        Ok(m)
    }

    pub fn dielectric(permittivity: DrudeLorentzParams) -> Self {
        MaterialModel::DrudeLorentz {
            permittivity,
            permeability: DrudeLorentzParams::none(),
        }
    }

    pub fn magnetic(permeability: DrudeLorentzParams) -> Self {
        MaterialModel::DrudeLorentz {
            permittivity: DrudeLorentzParams::none(),
            permeability,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MaterialModel::ConstantStatic { eps, mu } => require(
                eps.is_finite() && mu.is_finite() && *eps >= 1.0 && *mu >= 1.0,
                || format!("constant eps and mu must be finite and at least 1, got {eps}, {mu}"),
            ),
            MaterialModel::DrudeLorentz {
                permittivity,
                permeability,
            } => {
                permittivity.validate()?;
                permeability.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(
            self,
            MaterialModel::PerfectConductor | MaterialModel::PerfectlyPermeable
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            MaterialModel::Vacuum => "vacuum",
            MaterialModel::ConstantStatic { .. } => "constant",
            MaterialModel::DrudeLorentz { .. } => "drude-lorentz",
            MaterialModel::PerfectConductor => "perfect-conductor",
            MaterialModel::PerfectlyPermeable => "perfectly-permeable",
        }
    }

    fn ideal_error(&self) -> Error {
        Error::UnsupportedModel(self.name())
    }

    pub fn epsilon_ixi(&self, xi: f64) -> Result<f64> {
        match self {
            MaterialModel::Vacuum => Ok(1.0),
            MaterialModel::ConstantStatic { eps, .. } => Ok(*eps),
            MaterialModel::DrudeLorentz { permittivity, .. } => {
                Ok(1.0 + permittivity.susceptibility_ixi(xi))
            }
            _ => Err(self.ideal_error()),
        }
    }

    pub fn mu_ixi(&self, xi: f64) -> Result<f64> {
        match self {
            MaterialModel::Vacuum => Ok(1.0),
            MaterialModel::ConstantStatic { mu, .. } => Ok(*mu),
            MaterialModel::DrudeLorentz { permeability, .. } => {
                Ok(1.0 + permeability.susceptibility_ixi(xi))
            }
            _ => Err(self.ideal_error()),
        }
    }

    pub fn epsilon_complex(&self, omega: Complex64) -> Result<Complex64> {
        match self {
            MaterialModel::Vacuum => Ok(Complex64::new(1.0, 0.0)),
            MaterialModel::ConstantStatic { eps, .. } => Ok(Complex64::new(*eps, 0.0)),
            MaterialModel::DrudeLorentz { permittivity, .. } => {
                Ok(1.0 + permittivity.susceptibility(omega))
            }
            _ => Err(self.ideal_error()),
        }
    }

    pub fn mu_complex(&self, omega: Complex64) -> Result<Complex64> {
        match self {
            MaterialModel::Vacuum => Ok(Complex64::new(1.0, 0.0)),
            MaterialModel::ConstantStatic { mu, .. } => Ok(Complex64::new(*mu, 0.0)),
            MaterialModel::DrudeLorentz { permeability, .. } => {
                Ok(1.0 + permeability.susceptibility(omega))
            }
            _ => Err(self.ideal_error()),
        }
    }

    /// ε, μ and εμξ² at imaginary frequency ξ, with the ξ = 0 limit of
    /// metallic responses resolved according to `zero`.
    pub fn response(&self, xi: f64, zero: ZeroFrequency) -> Result<Response> {
        match self {
            MaterialModel::Vacuum => Ok(Response {
                eps: 1.0,
                mu: 1.0,
                k2: xi * xi,
            }),
            MaterialModel::ConstantStatic { eps, mu } => Ok(Response {
                eps: *eps,
                mu: *mu,
                k2: eps * mu * xi * xi,
            }),
            MaterialModel::DrudeLorentz {
                permittivity,
                permeability,
            } => {
                let eps = 1.0 + permittivity.susceptibility_ixi(xi);
                let mu = 1.0 + permeability.susceptibility_ixi(xi);
                let k2 = if xi > 0.0 {
                    eps * mu * xi * xi
                } else if eps.is_finite() && mu.is_finite() {
                    0.0
                } else if mu.is_finite() {
                    permittivity.susceptibility_xi2(0.0, zero) * mu
                } else if eps.is_finite() {
                    permeability.susceptibility_xi2(0.0, zero) * eps
                } else {
                    return Err(Error::InvalidParameter(
                        "metallic permittivity and permeability together have no zero-frequency limit"
                            .into(),
                    ));
                };
                Ok(Response { eps, mu, k2 })
            }
            _ => Err(self.ideal_error()),
        }
    }

    /// Resonance and plasma frequencies of the model, for quadrature scaling.
    pub fn characteristic_frequencies(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let MaterialModel::DrudeLorentz {
            permittivity,
            permeability,
        } = self
        {
            for p in [permittivity, permeability] {
                if !p.is_trivial() {
                    if p.resonance_frequency > 0.0 {
                        out.push(p.resonance_frequency);
                    }
                    out.push(p.plasma_frequency);
                }
            }
        }
        out
    }
}

/// Reference magneto-dielectric: ω_Pe = 0.75, ω_Te = 1.03, γ = 10⁻³, with
/// a magnetic resonance at ω_Tm = 1 tuned to the static permeability `mu0`.
pub fn drude_lorentz_example(mu0: f64) -> Result<MaterialModel> {
    Ok(MaterialModel::DrudeLorentz {
        permittivity: DrudeLorentzParams::new(0.75, 1.03, 0.001)?,
        permeability: DrudeLorentzParams::with_static_value(mu0, 1.0, 0.001)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig3_eps() -> DrudeLorentzParams {
        DrudeLorentzParams::new(0.75, 1.03, 0.001).unwrap()
    }

    #[test]
    fn vacuum_is_unity() {
        for xi in [0.0, 0.5, 1e3] {
            assert_eq!(MaterialModel::Vacuum.epsilon_ixi(xi).unwrap(), 1.0);
            assert_eq!(MaterialModel::Vacuum.mu_ixi(xi).unwrap(), 1.0);
        }
    }

    #[test]
    fn static_permittivity_value() {
        let m = MaterialModel::dielectric(fig3_eps());
        assert_relative_eq!(
            m.epsilon_ixi(0.0).unwrap(),
            1.0 + 0.5625 / 1.0609,
            max_relative = 1e-15
        );
        assert_relative_eq!(m.epsilon_ixi(0.0).unwrap(), 1.5302, epsilon = 1e-4);
        assert!(m.epsilon_ixi(1e8).unwrap() - 1.0 < 1e-15);
    }

    #[test]
    fn permeability_tuned_to_static_value() {
        let p = DrudeLorentzParams::with_static_value(5.0, 1.0, 0.001).unwrap();
        assert_relative_eq!(p.plasma_frequency, 2.0);
        let m = MaterialModel::magnetic(p);
        assert_relative_eq!(m.mu_ixi(0.0).unwrap(), 5.0);
        assert_eq!(MaterialModel::constant(2.0, 3.0).unwrap().mu_ixi(7.0).unwrap(), 3.0);
    }

    #[test]
    fn ideal_markers_have_no_response() {
        for m in [MaterialModel::PerfectConductor, MaterialModel::PerfectlyPermeable] {
            assert!(matches!(m.epsilon_ixi(1.0), Err(Error::UnsupportedModel(_))));
            assert!(m.mu_complex(Complex64::new(1.0, 0.0)).is_err());
        }
    }

    #[test]
    fn complex_value_matches_direct_arithmetic() {
        let p = DrudeLorentzParams::new(0.75, 1.0, 0.01).unwrap();
        let m = MaterialModel::dielectric(p);
        let w = Complex64::new(1.0, 0.005);
        let eps = m.epsilon_complex(w).unwrap();
        // 1 + ω_P²/(ω_T² − ω² − iγω) expanded by hand
        let (a, b) = (1.0f64, 0.005f64);
        let re_w2 = a * a - b * b;
        let im_w2 = 2.0 * a * b;
        let den_re = 1.0 - re_w2 + 0.01 * b;
        let den_im = -im_w2 - 0.01 * a;
        let n = den_re * den_re + den_im * den_im;
        let expect = Complex64::new(1.0 + 0.5625 * den_re / n, -0.5625 * den_im / n);
        assert_relative_eq!(eps.re, expect.re, max_relative = 1e-14);
        assert_relative_eq!(eps.im, expect.im, max_relative = 1e-14);
    }

    #[test]
    fn lossless_below_resonance_is_real() {
        let m = MaterialModel::dielectric(DrudeLorentzParams::new(0.75, 1.0, 0.0).unwrap());
        let e = m.epsilon_complex(Complex64::new(0.6, 0.0)).unwrap();
        assert_eq!(e.im, 0.0);
        assert!(e.re > 1.0);
    }

    #[test]
    fn drude_metal_zero_frequency() {
        let metal = MaterialModel::dielectric(DrudeLorentzParams::new(2.0, 0.0, 0.1).unwrap());
        assert!(metal.epsilon_ixi(0.0).unwrap().is_infinite());
        let drude = metal.response(0.0, ZeroFrequency::Drude).unwrap();
        let plasma = metal.response(0.0, ZeroFrequency::Plasma).unwrap();
        assert_eq!(drude.k2, 0.0);
        assert_eq!(plasma.k2, 4.0);
        // finite-γ limit is approached continuously
        let small = metal.response(1e-9, ZeroFrequency::Drude).unwrap();
        assert!(small.k2 < 1e-6);
    }

    #[test]
    fn validation() {
        assert!(MaterialModel::constant(0.5, 1.0).is_err());
        assert!(DrudeLorentzParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(DrudeLorentzParams::with_static_value(0.9, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn decreasing_on_imaginary_axis(
            wp in 0.0f64..5.0, wt in 0.0f64..5.0, g in 0.0f64..2.0,
            a in 0.0f64..10.0, da in 0.0f64..10.0,
        ) {
            let m = MaterialModel::dielectric(DrudeLorentzParams::new(wp, wt, g).unwrap());
            let lo = m.epsilon_ixi(a).unwrap();
            let hi = m.epsilon_ixi(a + da).unwrap();
            prop_assert!(hi <= lo);
            prop_assert!(hi >= 1.0);
        }

        #[test]
        fn complex_on_axis_matches(
            wp in 0.0f64..5.0, wt in 0.01f64..5.0, g in 0.0f64..2.0, xi in 0.0f64..10.0,
        ) {
            let m = MaterialModel::dielectric(DrudeLorentzParams::new(wp, wt, g).unwrap());
            let c = m.epsilon_complex(Complex64::new(0.0, xi)).unwrap();
            let r = m.epsilon_ixi(xi).unwrap();
            prop_assert!(c.im.abs() <= 1e-15 * r);
            prop_assert!((c.re - r).abs() <= 4.0 * f64::EPSILON * r);
        }

        #[test]
        fn reality_condition(
            wp in 0.0f64..5.0, wt in 0.0f64..5.0, g in 0.0f64..2.0,
            re in -5.0f64..5.0, im in 0.001f64..5.0,
        ) {
            let m = MaterialModel::dielectric(DrudeLorentzParams::new(wp, wt, g).unwrap());
            let w = Complex64::new(re, im);
            let lhs = m.epsilon_complex(w).unwrap().conj();
            let rhs = m.epsilon_complex(-w.conj()).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
        }
    }
}
