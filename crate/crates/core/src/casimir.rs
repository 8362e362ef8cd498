//! Casimir stress and force per unit area between planar stacks.
//!
//! Sign convention: a positive pressure pulls the two walls together.

use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::planar::{CavityAtXi, CavityPoint, PlanarScenario};
use crate::quadrature::{inner_b, integrate_semiinf, matsubara_sum, QuadResult, QuadSpec};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TemperatureSpec {
    #[default]
    Zero,
    /// k_B T in units of ħω_ref.
    Finite(f64),
}

impl TemperatureSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TemperatureSpec::Finite(t) if !(t > 0.0 && t.is_finite()) => Err(
                Error::InvalidParameter(format!("temperature must be positive, got {t}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    #[default]
    AttractionPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureResult {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
    pub sign: SignConvention,
}

impl PressureResult {
    fn from_quad(r: QuadResult) -> Result<Self> {
        let value = r.into_result()?;
        Ok(Self {
            value,
            error: r.error,
            nodes: r.nodes,
            sign: SignConvention::AttractionPositive,
        })
    }
}

/// Which combination of the interspace stress terms is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    /// The full g(z, iξ, q), at an interior point.
    Stress(f64),
    /// The force on the right wall: stress at the wall with the single-interface
    /// term of the right wall removed (it cancels against the stress behind it).
    Force,
}

fn force_g(cav: &CavityAtXi, p: &CavityPoint) -> f64 {
    let inv_n2 = 1.0 / (cav.gap.eps * cav.gap.mu);
    let b2 = p.b * p.b;
    let q2 = p.q * p.q;
    let sum = b2 * (1.0 + inv_n2);
    let diff = q2 * (1.0 - inv_n2);
    let e = p.round_trip;
    let mut g = -2.0 * (sum + diff) * e * p.rs_plus * p.rs_minus / p.ds
        - 2.0 * (sum - diff) * e * p.rp_plus * p.rp_minus / p.dp;
    let c = cav.gap.k2 * (1.0 - inv_n2);
    if c != 0.0 {
        g += c * e * p.rs_minus * (1.0 + p.rs_plus * p.rs_plus) / p.ds;
        g -= c * e * p.rp_minus * (1.0 + p.rp_plus * p.rp_plus) / p.dp;
    }
    g
}

/// Records the first error raised inside a quadrature callback.
#[derive(Default)]
pub(crate) struct Trap(RefCell<Option<Error>>);

impl Trap {
    pub(crate) fn catch(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    }

    pub(crate) fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn scales(scn: &PlanarScenario) -> (f64, f64) {
    let d = scn.width;
    let n0 = scn
        .interspace
        .response(0.0, scn.zero_frequency)
        .map(|r| r.index())
        .unwrap_or(1.0);
    let n0 = if n0.is_finite() { n0 } else { 1.0 };
    let geometric = 1.0 / (2.0 * n0 * d);
    let material = scn
        .characteristic_frequencies()
        .into_iter()
        .fold(0.0f64, f64::max);
    let xi_scale = if material > 0.0 {
        geometric.min(material.max(geometric * 1e-3))
    } else {
        geometric
    };
    (xi_scale, 1.0 / (2.0 * d))
}

/// h(ξ) with pressure = (1/π)∫h(ξ)dξ, i.e. −(μ/8π)∫dq (q/b) g.
fn spectral_density(
    scn: &PlanarScenario,
    xi: f64,
    kernel: Kernel,
    b_spec: &QuadSpec,
    trap: &Trap,
) -> QuadResult {
    let cav = match CavityAtXi::new(scn, xi) {
        Ok(c) => c,
        Err(e) => {
            trap.catch(Err(e));
            return QuadResult {
                value: 0.0,
                error: 0.0,
                nodes: 0,
                converged: true,
            };
        }
    };
    let mu = cav.gap.mu;
    let h = |_xi: f64, b: f64, q: f64| {
        let v = cav.point_b(b, q).map(|p| match kernel {
            Kernel::Stress(z) => cav.stress_g(&p, z),
            Kernel::Force => force_g(&cav, &p),
        });
        trap.catch(v)
    };
    let r = inner_b(&h, xi, cav.b_min(), b_spec);
    let factor = if mu.is_finite() { -mu / (8.0 * PI) } else { 0.0 };
    r.scaled(factor)
}

fn integrate_pressure(
    scn: &PlanarScenario,
    kernel: Kernel,
    temp: TemperatureSpec,
    spec: &QuadSpec,
) -> Result<PressureResult> {
    scn.validate()?;
    temp.validate()?;
    spec.validate()?;
    let (xi_scale, b_scale) = scales(scn);
    let b_spec = spec.halved().with_scale(b_scale);
    let trap = Trap::default();
    let nodes = std::cell::Cell::new(0usize);
    let inner_ok = std::cell::Cell::new(true);
    let density = |xi: f64| {
        let r = spectral_density(scn, xi, kernel, &b_spec, &trap);
        nodes.set(nodes.get() + r.nodes);
        if !r.converged {
            inner_ok.set(false);
        }
        r.value
    };
    let mut r = match temp {
        TemperatureSpec::Zero => {
            integrate_semiinf(density, &spec.halved().with_scale(xi_scale)).scaled(1.0 / PI)
        }
        TemperatureSpec::Finite(t) => matsubara_sum(density, t, &spec.halved()),
    };
    trap.check()?;
    r.nodes = nodes.get();
    r.converged &= inner_ok.get();
    PressureResult::from_quad(r)
}

/// zz component of the interspace stress at 0 < z < d.
pub fn stress_zz(
    scn: &PlanarScenario,
    z: f64,
    temp: TemperatureSpec,
    spec: &QuadSpec,
) -> Result<PressureResult> {
    if !(z > 0.0 && z < scn.width) {
        return Err(Error::InvalidParameter(format!(
            "z = {z} must lie inside the interspace (0, {})",
            scn.width
        )));
    }
    integrate_pressure(scn, Kernel::Stress(z), temp, spec)
}

/// Force per unit area between the two walls.
pub fn casimir_pressure(
    scn: &PlanarScenario,
    temp: TemperatureSpec,
    spec: &QuadSpec,
) -> Result<PressureResult> {
    integrate_pressure(scn, Kernel::Force, temp, spec)
}

/// Matsubara-summed pressure at k_B T = `temperature`.
pub fn matsubara_pressure(scn: &PlanarScenario, temperature: f64, spec: &QuadSpec) -> Result<PressureResult> {
    casimir_pressure(scn, TemperatureSpec::Finite(temperature), spec)
}

/// Spectral density h(ξ) of the pressure, pressure = (1/π)∫h(ξ)dξ.
///
/// At finite temperature the pressure is 2T Σ' h(ξ_n); the classical
/// high-temperature limit is T·h(0).
pub fn pressure_spectral_density(scn: &PlanarScenario, xi: f64, spec: &QuadSpec) -> Result<f64> {
    scn.validate()?;
    let (_, b_scale) = scales(scn);
    let trap = Trap::default();
    let r = spectral_density(scn, xi, Kernel::Force, &spec.with_scale(b_scale), &trap);
    trap.check()?;
    r.into_result()
}

fn medium_factor(eps: f64, mu: f64) -> Result<f64> {
    if !(eps >= 1.0 && mu >= 1.0 && eps.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "static eps and mu must be at least 1, got {eps}, {mu}"
        )));
    }
    Ok((mu / eps).sqrt() * (2.0 / 3.0 + 1.0 / (3.0 * eps * mu)))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

/// Closed-form pressure between perfect mirrors with a static medium in between.
pub fn perfect_mirror_pressure(eps: f64, mu: f64, d: f64) -> Result<f64> {
    positive("d", d)?;
    Ok(PI.powi(2) / 240.0 * medium_factor(eps, mu)? / d.powi(4))
}

/// Force per unit area on a perfectly conducting plate inside a perfectly
/// conducting cavity, gaps `d_left` and `d_right` filled with a static medium.
pub fn plate_in_cavity_force(eps: f64, mu: f64, d_left: f64, d_right: f64) -> Result<f64> {
    positive("d_left", d_left)?;
    positive("d_right", d_right)?;
    Ok(PI.powi(2) / 240.0 * medium_factor(eps, mu)? * (d_right.powi(-4) - d_left.powi(-4)))
}

/// The same force computed from the Minkowski stress tensor (μ = 1).
pub fn plate_in_cavity_force_minkowski(eps: f64, d_left: f64, d_right: f64) -> Result<f64> {
    positive("d_left", d_left)?;
    positive("d_right", d_right)?;
    medium_factor(eps, 1.0)?;
    Ok(PI.powi(2) / 240.0 / eps.sqrt() * (d_right.powi(-4) - d_left.powi(-4)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{DrudeLorentzParams, MaterialModel};
    use crate::planar::LayerStack;
    use approx::assert_relative_eq;

    fn mirrors(interspace: MaterialModel, d: f64) -> PlanarScenario {
        let pc = LayerStack::half_space(MaterialModel::PerfectConductor);
        PlanarScenario::new(pc.clone(), pc, interspace, d).unwrap()
    }

    fn spec() -> QuadSpec {
        QuadSpec::new(1e-9)
    }

    #[test]
    fn ideal_mirrors_reproduce_closed_form() {
        let p = casimir_pressure(&mirrors(MaterialModel::Vacuum, 1.0), TemperatureSpec::Zero, &spec()).unwrap();
        assert_relative_eq!(p.value, PI.powi(2) / 240.0, max_relative = 1e-8);
        assert!(p.error < 1e-8 * p.value);
    }

    #[test]
    fn filled_ideal_cavity() {
        for (eps, mu) in [(2.0, 1.0), (1.0, 3.0), (2.5, 1.7)] {
            let m = MaterialModel::constant(eps, mu).unwrap();
            let p = casimir_pressure(&mirrors(m, 1.3), TemperatureSpec::Zero, &spec()).unwrap();
            let expect = perfect_mirror_pressure(eps, mu, 1.3).unwrap();
            assert_relative_eq!(p.value, expect, max_relative = 1e-7);
        }
        let half_filled = PI.powi(2) / 240.0 / 2f64.sqrt() * (2.0 / 3.0 + 1.0 / 6.0);
        assert_relative_eq!(perfect_mirror_pressure(2.0, 1.0, 1.0).unwrap(), half_filled, max_relative = 1e-14);
        assert_relative_eq!(half_filled, 0.0242327, max_relative = 1e-4);
    }

    #[test]
    fn vacuum_walls_give_nothing() {
        let m = MaterialModel::dielectric(DrudeLorentzParams::new(0.75, 1.03, 0.001).unwrap());
        let s = PlanarScenario::vacuum_gap(LayerStack::half_space(m), LayerStack::vacuum(), 1.0).unwrap();
        let p = QuadSpec {
            abs_floor: 1e-20,
            ..spec()
        };
        assert_eq!(casimir_pressure(&s, TemperatureSpec::Zero, &p).unwrap().value, 0.0);
    }

    #[test]
    fn stress_between_ideal_mirrors_is_uniform() {
        let s = mirrors(MaterialModel::Vacuum, 1.0);
        let a = stress_zz(&s, 0.2, TemperatureSpec::Zero, &spec()).unwrap();
        let b = stress_zz(&s, 0.7, TemperatureSpec::Zero, &spec()).unwrap();
        assert_eq!(a.value, b.value);
        assert_relative_eq!(a.value, PI.powi(2) / 240.0, max_relative = 1e-8);
        assert!(stress_zz(&s, 1.0, TemperatureSpec::Zero, &spec()).is_err());
    }

    #[test]
    fn ideal_pressure_scales_as_inverse_fourth_power() {
        let p1 = casimir_pressure(&mirrors(MaterialModel::Vacuum, 1.0), TemperatureSpec::Zero, &spec()).unwrap();
        let p2 = casimir_pressure(&mirrors(MaterialModel::Vacuum, 2.0), TemperatureSpec::Zero, &spec()).unwrap();
        let slope = (p2.value / p1.value).ln() / 2f64.ln();
        assert!((slope + 4.0).abs() < 1e-6);
    }

    /// Independent trapezoid-with-Richardson oracle in (ξ, b) for identical
    /// Drude–Lorentz half spaces across vacuum.
    fn trapezoid_oracle(eps: &MaterialModel, d: f64, steps: usize) -> f64 {
        let pressure = |n: usize| {
            // x = ξ d ∈ (0, X), y = (b − ξ) d ∈ (0, Y) after truncation
            let (xmax, ymax) = (20.0, 20.0);
            let hx = xmax / n as f64;
            let hy = ymax / n as f64;
            let mut total = 0.0;
            for i in 0..=n {
                let wx = if i == 0 || i == n { 0.5 } else { 1.0 };
                let xi = i as f64 * hx / d;
                let e = eps.epsilon_ixi(xi).unwrap();
                for j in 0..=n {
                    let wy = if j == 0 || j == n { 0.5 } else { 1.0 };
                    let b = xi + j as f64 * hy / d;
                    if b == 0.0 {
                        continue;
                    }
                    let q2 = b * b - xi * xi;
                    let b1 = (e * xi * xi + q2).sqrt();
                    let rs = (b - b1) / (b + b1);
                    let rp = (e * b - b1) / (e * b + b1);
                    let ex = (-2.0 * b * d).exp();
                    let g = -4.0 * b * b * ex * (rs * rs / (1.0 - rs * rs * ex) + rp * rp / (1.0 - rp * rp * ex));
                    total += wx * wy * g;
                }
            }
            -total * hx * hy / (d * d) / (8.0 * PI * PI)
        };
        let coarse = pressure(steps);
        let fine = pressure(2 * steps);
        (4.0 * fine - coarse) / 3.0
    }

    #[test]
    fn drude_lorentz_half_spaces_match_trapezoid_oracle() {
        let m = MaterialModel::dielectric(DrudeLorentzParams::new(0.75, 1.03, 0.001).unwrap());
        let s = PlanarScenario::vacuum_gap(LayerStack::half_space(m), LayerStack::half_space(m), 1.0).unwrap();
        let p = casimir_pressure(&s, TemperatureSpec::Zero, &spec()).unwrap();
        let oracle = trapezoid_oracle(&m, 1.0, 400);
        assert!(p.value > 0.0);
        assert_relative_eq!(p.value, oracle, max_relative = 1e-4);
    }

    #[test]
    fn pressure_decreases_with_distance() {
        let m = MaterialModel::constant(3.0, 1.0).unwrap();
        let s = PlanarScenario::vacuum_gap(LayerStack::half_space(m), LayerStack::half_space(m), 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for d in [0.5, 1.0, 2.0, 4.0] {
            let p = casimir_pressure(&s.with_width(d), TemperatureSpec::Zero, &spec()).unwrap().value;
            assert!(p > 0.0 && p < prev);
            prev = p;
        }
    }

    #[test]
    fn low_temperature_approaches_zero_temperature() {
        let s = mirrors(MaterialModel::Vacuum, 1.0);
        let warm = matsubara_pressure(&s, 0.01, &spec()).unwrap();
        assert_relative_eq!(warm.value, PI.powi(2) / 240.0, max_relative = 1e-3);
    }

    #[test]
    fn high_temperature_is_classical() {
        let m = MaterialModel::constant(4.0, 1.0).unwrap();
        let s = PlanarScenario::vacuum_gap(LayerStack::half_space(m), LayerStack::half_space(m), 1.0).unwrap();
        let t = 10.0;
        let full = matsubara_pressure(&s, t, &spec()).unwrap().value;
        let n0 = t * pressure_spectral_density(&s, 0.0, &spec()).unwrap();
        assert_relative_eq!(full, n0, max_relative = 1e-6);
        // linear in T once only the n = 0 term survives
        let hotter = matsubara_pressure(&s, 2.0 * t, &spec()).unwrap().value;
        assert_relative_eq!(hotter / full, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn plasma_and_drude_prescriptions_differ_only_at_zero_frequency() {
        use crate::material::ZeroFrequency;
        let metal = MaterialModel::dielectric(DrudeLorentzParams::new(5.0, 0.0, 0.05).unwrap());
        let s = PlanarScenario::vacuum_gap(LayerStack::half_space(metal), LayerStack::half_space(metal), 1.0).unwrap();
        let drude = pressure_spectral_density(&s, 0.0, &spec()).unwrap();
        let plasma = pressure_spectral_density(&s.clone().with_zero_frequency(ZeroFrequency::Plasma), 0.0, &spec()).unwrap();
        assert!(plasma > drude);
        let a = pressure_spectral_density(&s, 0.3, &spec()).unwrap();
        let b = pressure_spectral_density(&s.with_zero_frequency(ZeroFrequency::Plasma), 0.3, &spec()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plate_in_cavity_closed_forms() {
        assert_eq!(plate_in_cavity_force(2.0, 1.0, 1.5, 1.5).unwrap(), 0.0);
        assert_relative_eq!(
            plate_in_cavity_force(2.0, 1.0, 2.0, 1.0).unwrap(),
            perfect_mirror_pressure(2.0, 1.0, 1.0).unwrap() * 15.0 / 16.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            plate_in_cavity_force(1.0, 1.0, 1e6, 1.0).unwrap(),
            PI.powi(2) / 240.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            plate_in_cavity_force_minkowski(4.0, 1e6, 1.0).unwrap(),
            PI.powi(2) / 480.0,
            max_relative = 1e-12
        );
        assert_eq!(
            plate_in_cavity_force(1.0, 1.0, 2.0, 1.0).unwrap(),
            plate_in_cavity_force_minkowski(1.0, 2.0, 1.0).unwrap()
        );
        for eps in [1.5, 2.0, 4.0, 10.0] {
            let l = plate_in_cavity_force(eps, 1.0, 2.0, 1.0).unwrap();
            let m = plate_in_cavity_force_minkowski(eps, 2.0, 1.0).unwrap();
            assert!(l.abs() < m.abs());
        }
    }
}
