//! Casimir–Polder potentials and forces on ground-state atoms near planar walls.
//!
//! Potentials are negative when the atom is attracted towards the wall at z = 0.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::casimir::Trap;
use crate::error::{require, Error, Result};
use crate::material::MaterialModel;
use crate::planar::{CavityAtXi, CavityPoint, LayerStack, PlanarScenario};
use crate::quadrature::{brent, inner_b, integrate_from, integrate_semiinf, QuadResult, QuadSpec};

/// Isotropic ground-state polarizability on the imaginary axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Polarizability {
    /// Frequency-independent α₀.
    Static(f64),
    /// α(iξ) = α₀ω₁₀²/(ω₁₀² + ξ²).
    TwoLevel { omega10: f64, alpha0: f64 },
    /// Sum of two-level terms, each given as (ω_k, α_k(0)).
    MultiOscillator(Vec<(f64, f64)>),
}

/// Magnetizability β(iξ), same parametrisation as the polarizability.
pub type Magnetizability = Polarizability;

impl Polarizability {
    /// Two-level atom from its transition dipole, α₀ = 2|d₀₁|²/(3ω₁₀).
    pub fn from_dipole(omega10: f64, dipole_sq: f64) -> Result<Self> {
        let p = Polarizability::TwoLevel {
            omega10,
            alpha0: 2.0 * dipole_sq / (3.0 * omega10),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |w: f64, a: f64| {
            require(w > 0.0 && w.is_finite(), || {
                format!("transition frequency must be positive, got {w}")
            })?;
            require(a >= 0.0 && a.is_finite(), || {
                format!("static polarizability must be non-negative, got {a}")
            })
        };
        match self {
            Polarizability::Static(a) => require(*a >= 0.0 && a.is_finite(), || {
                format!("static polarizability must be non-negative, got {a}")
            }),
            Polarizability::TwoLevel { omega10, alpha0 } => check(*omega10, *alpha0),
            Polarizability::MultiOscillator(list) => {
                require(!list.is_empty(), || "oscillator list is empty".into())?;
                list.iter().try_for_each(|&(w, a)| check(w, a))
            }
        }
    }

    pub fn at_ixi(&self, xi: f64) -> f64 {
        let term = |w: f64, a: f64| a * w * w / (w * w + xi * xi);
        match self {
            Polarizability::Static(a) => *a,
            Polarizability::TwoLevel { omega10, alpha0 } => term(*omega10, *alpha0),
            Polarizability::MultiOscillator(list) => list.iter().map(|&(w, a)| term(w, a)).sum(),
        }
    }

    pub fn static_value(&self) -> f64 {
        self.at_ixi(0.0)
    }

    /// ⟨0|d²|0⟩ = Σ_k |d₀k|²; undefined for a static model.
    pub fn dipole_square(&self) -> Option<f64> {
        match self {
            Polarizability::Static(_) => None,
            Polarizability::TwoLevel { omega10, alpha0 } => Some(1.5 * omega10 * alpha0),
            Polarizability::MultiOscillator(list) => {
                Some(list.iter().map(|&(w, a)| 1.5 * w * a).sum())
            }
        }
    }

    pub fn characteristic_frequencies(&self) -> Vec<f64> {
        match self {
            Polarizability::Static(_) => Vec::new(),
            Polarizability::TwoLevel { omega10, .. } => vec![*omega10],
            Polarizability::MultiOscillator(list) => list.iter().map(|&(w, _)| w).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Polarizability::Static(a) => *a == 0.0,
            Polarizability::TwoLevel { alpha0, .. } => *alpha0 == 0.0,
            Polarizability::MultiOscillator(list) => list.iter().all(|&(_, a)| a == 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorKind {
    Conductor,
    Permeable,
}

impl MirrorKind {
    fn material(self) -> MaterialModel {
        match self {
            MirrorKind::Conductor => MaterialModel::PerfectConductor,
            MirrorKind::Permeable => MaterialModel::PerfectlyPermeable,
        }
    }

    fn sign(self) -> f64 {
        match self {
            MirrorKind::Conductor => -1.0,
            MirrorKind::Permeable => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// A single wall occupying z < 0 (any multilayer stack).
    HalfSpace(LayerStack),
    /// A free-standing slab occupying −thickness < z < 0.
    Plate { material: MaterialModel, thickness: f64 },
    /// Two walls at z = 0 and z = width with vacuum in between.
    Cavity { left: LayerStack, right: LayerStack, width: f64 },
    IdealMirror(MirrorKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomScenario {
    pub atom: Polarizability,
    pub geometry: Geometry,
    /// Distance of the atom from the left wall.
    pub z: f64,
}

impl AtomScenario {
    pub fn new(atom: Polarizability, geometry: Geometry, z: f64) -> Result<Self> {
        let s = Self { atom, geometry, z };
        s.validate()?;
        Ok(s)
    }

    pub fn with_z(&self, z: f64) -> Self {
        Self {
            z,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.atom.validate()?;
        require(self.z > 0.0 && self.z.is_finite(), || {
            format!("atom position must be positive, got {}", self.z)
        })?;
        match &self.geometry {
            Geometry::HalfSpace(s) => s.validate(),
            Geometry::Plate { material, thickness } => {
                LayerStack::slab(*material, *thickness).map(|_| ())
            }
            Geometry::Cavity { left, right, width } => {
                left.validate()?;
                right.validate()?;
                require(self.z < *width, || {
                    format!("atom position {} must lie inside the cavity of width {width}", self.z)
                })
            }
            Geometry::IdealMirror(_) => Ok(()),
        }
    }

    /// The walls as a planar scenario with vacuum interspace.
    pub fn planar(&self) -> Result<PlanarScenario> {
        let (left, right, width) = match &self.geometry {
            Geometry::HalfSpace(s) => (s.clone(), LayerStack::vacuum(), 2.0 * self.z),
            Geometry::Plate { material, thickness } => {
                (LayerStack::slab(*material, *thickness)?, LayerStack::vacuum(), 2.0 * self.z)
            }
            Geometry::Cavity { left, right, width } => (left.clone(), right.clone(), *width),
            Geometry::IdealMirror(kind) => (
                LayerStack::half_space(kind.material()),
                LayerStack::vacuum(),
                2.0 * self.z,
            ),
        };
        PlanarScenario::vacuum_gap(left, right, width)
    }

    fn nearest_wall(&self) -> f64 {
        match &self.geometry {
            Geometry::Cavity { width, .. } => self.z.min(width - self.z),
            _ => self.z,
        }
    }
}

/// Whether the cavity denominators D_σ are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reflections {
    #[default]
    Multiple,
    /// D_σ → 1: each wall acts independently.
    Single,
}

pub(crate) fn frequency_scale(geometric: f64, freqs: impl IntoIterator<Item = f64>) -> f64 {
    let top = freqs.into_iter().fold(0.0f64, f64::max);
    if top > 0.0 {
        geometric.min(top)
    } else {
        geometric
    }
}

fn atom_integral<K>(scn: &AtomScenario, spec: &QuadSpec, kernel: K) -> Result<QuadResult>
where
    K: Fn(&CavityAtXi, &CavityPoint) -> f64,
{
    let planar = scn.planar()?;
    let near = scn.nearest_wall();
    let freqs = scn
        .atom
        .characteristic_frequencies()
        .into_iter()
        .chain(planar.characteristic_frequencies());
    let xi_spec = spec.halved().with_scale(frequency_scale(0.5 / near, freqs));
    let b_spec = spec.halved().halved().with_scale(0.5 / near);
    let trap = Trap::default();
    let nodes = Cell::new(0usize);
    let inner_ok = Cell::new(true);
    let outer = integrate_semiinf(
        |xi| {
            let a = scn.atom.at_ixi(xi);
            if a == 0.0 {
                return 0.0;
            }
            let cav = match CavityAtXi::new(&planar, xi) {
                Ok(c) => c,
                Err(e) => return trap.catch(Err(e)),
            };
            let h = |_: f64, b: f64, q: f64| trap.catch(cav.point_b(b, q).map(|p| kernel(&cav, &p)));
            let r = inner_b(&h, xi, cav.b_min(), &b_spec);
            nodes.set(nodes.get() + r.nodes);
            if !r.converged {
                inner_ok.set(false);
            }
            a * r.value
        },
        &xi_spec,
    );
    trap.check()?;
    Ok(QuadResult {
        nodes: nodes.get(),
        converged: outer.converged && inner_ok.get(),
        ..outer
    }
    .scaled(1.0 / (8.0 * PI * PI)))
}

/// Absolute floor for potentials that pass through zero: a zero floor in
/// `spec` becomes rel_tol·10⁻³ of the perfect-mirror magnitude at the atom.
fn potential_floor(scn: &AtomScenario, spec: &QuadSpec) -> Result<QuadSpec> {
    if spec.abs_floor > 0.0 {
        return Ok(*spec);
    }
    let near = scn.nearest_wall();
    let reference = perfect_mirror_quad(&scn.atom, near, MirrorKind::Conductor, &QuadSpec::new(1e-6))?.abs();
    Ok(spec.with_floor(spec.rel_tol * 1e-3 * reference * 8.0 * PI * PI))
}

/// U(z_A) from the full frequency and wavenumber integrals.
pub fn cp_potential(scn: &AtomScenario, spec: &QuadSpec) -> Result<f64> {
    cp_potential_with(scn, spec, Reflections::Multiple)
}

pub fn cp_potential_with(scn: &AtomScenario, spec: &QuadSpec, refl: Reflections) -> Result<f64> {
    scn.validate()?;
    spec.validate()?;
    if scn.atom.is_zero() {
        return Ok(0.0);
    }
    if let Geometry::IdealMirror(kind) = scn.geometry {
        return cp_potential_perfect_mirror(&scn.atom, scn.z, kind, spec);
    }
    let multiple = refl == Reflections::Multiple;
    let spec = potential_floor(scn, spec)?;
    atom_integral(scn, &spec, |cav, p| cav.cp_bracket(p, scn.z, multiple))?.into_result()
}

/// F = −∂U/∂z_A, differentiated under the integral. Negative values point
/// towards the left wall.
pub fn cp_force(scn: &AtomScenario, spec: &QuadSpec) -> Result<f64> {
    scn.validate()?;
    spec.validate()?;
    if scn.atom.is_zero() {
        return Ok(0.0);
    }
    if let Geometry::IdealMirror(kind) = scn.geometry {
        return cp_force_perfect_mirror(&scn.atom, scn.z, kind, spec);
    }
    let spec = potential_floor(scn, spec)?.with_floor(0.0);
    let spec = spec.with_floor(potential_floor(scn, &spec)?.abs_floor / scn.nearest_wall());
    atom_integral(scn, &spec, |cav, p| cav.cp_bracket_dz(p, scn.z))?
        .scaled(-1.0)
        .into_result()
}

fn perfect_mirror_quad(atom: &Polarizability, z: f64, kind: MirrorKind, spec: &QuadSpec) -> Result<f64> {
    let s = spec.with_scale(frequency_scale(0.5 / z, atom.characteristic_frequencies()));
    integrate_semiinf(
        |xi| {
            let x = xi * z;
            atom.at_ixi(xi) * (-2.0 * x).exp() * (1.0 + 2.0 * x + 2.0 * x * x)
        },
        &s,
    )
    .scaled(kind.sign() / (16.0 * PI * PI * z.powi(3)))
    .into_result()
}

/// Closed-kernel potential near a perfect mirror; the permeable mirror
/// repels with exactly the opposite sign.
pub fn cp_potential_perfect_mirror(
    atom: &Polarizability,
    z: f64,
    kind: MirrorKind,
    spec: &QuadSpec,
) -> Result<f64> {
    atom.validate()?;
    require(z > 0.0, || format!("atom position must be positive, got {z}"))?;
    perfect_mirror_quad(atom, z, kind, spec)
}

pub fn cp_force_perfect_mirror(
    atom: &Polarizability,
    z: f64,
    kind: MirrorKind,
    spec: &QuadSpec,
) -> Result<f64> {
    atom.validate()?;
    require(z > 0.0, || format!("atom position must be positive, got {z}"))?;
    let s = spec.with_scale(frequency_scale(0.5 / z, atom.characteristic_frequencies()));
    integrate_semiinf(
        |xi| {
            let x = xi * z;
            atom.at_ixi(xi) * (-2.0 * x).exp() * (3.0 + 6.0 * x + 6.0 * x * x + 4.0 * x.powi(3))
        },
        &s,
    )
    .scaled(kind.sign() / (16.0 * PI * PI * z.powi(4)))
    .into_result()
}

/// The v integral of the retarded half-space limit; positive means attraction.
pub fn retarded_halfspace_integral(eps: f64, mu: f64) -> Result<f64> {
    require(eps >= 1.0 && mu >= 1.0 && eps.is_finite() && mu.is_finite(), || {
        format!("static eps and mu must be finite and at least 1, got {eps}, {mu}")
    })?;
    retarded_integral_quad(eps, mu).into_result()
}

fn retarded_integral_quad(eps: f64, mu: f64) -> QuadResult {
    let n2m1 = eps * mu - 1.0;
    let size = (eps - 1.0) / (eps + 1.0) + (mu - 1.0) / (mu + 1.0);
    let spec = QuadSpec::new(1e-12).with_floor(1e-14 * size);
    integrate_from(
        |t| {
            let v = 1.0 + t;
            let root = (n2m1 + v * v).sqrt();
            let v2 = v * v;
            let v4 = v2 * v2;
            let rp = (eps * v - root) / (eps * v + root);
            let rs = (mu * v - root) / (mu * v + root);
            (2.0 / v2 - 1.0 / v4) * rp - rs / v4
        },
        0.0,
        &spec,
    )
}

/// Large-distance limit of the half-space potential from the static responses.
pub fn cp_retarded_halfspace_asymptote(alpha0: f64, eps: f64, mu: f64, z: f64) -> Result<f64> {
    require(z > 0.0, || format!("atom position must be positive, got {z}"))?;
    require(alpha0 >= 0.0, || format!("static polarizability must be non-negative, got {alpha0}"))?;
    Ok(-3.0 * alpha0 / (64.0 * PI * PI * z.powi(4)) * retarded_halfspace_integral(eps, mu)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    Dielectric,
    Magnetic,
}

fn one_frequency_integral<F: Fn(f64) -> Result<f64>>(
    f: F,
    factor: f64,
    freqs: impl IntoIterator<Item = f64>,
    spec: &QuadSpec,
) -> Result<f64> {
    let scale = frequency_scale(f64::INFINITY, freqs);
    let scale = if scale.is_finite() { scale } else { 1.0 };
    let trap = Trap::default();
    let r = integrate_semiinf(|xi| trap.catch(f(xi)), &spec.with_scale(scale));
    trap.check()?;
    r.scaled(factor).into_result()
}

fn require_kind(material: &MaterialModel, kind: ResponseKind) -> Result<()> {
    let (eps, mu) = (material.epsilon_ixi(1.0)?, material.mu_ixi(1.0)?);
    let ok = match kind {
        ResponseKind::Dielectric => mu == 1.0,
        ResponseKind::Magnetic => eps == 1.0,
    };
    require(ok, || {
        format!("{kind:?} limit needs a material whose other response is trivial")
    })
}

/// Short-distance half-space limits for a purely dielectric or purely
/// magnetic medium (z⁻³ attraction and z⁻¹ repulsion respectively).
pub fn nonretarded_asymptotes(
    atom: &Polarizability,
    material: &MaterialModel,
    z: f64,
    kind: ResponseKind,
    spec: &QuadSpec,
) -> Result<f64> {
    atom.validate()?;
    material.validate()?;
    require(z > 0.0, || format!("atom position must be positive, got {z}"))?;
    require_kind(material, kind)?;
    let freqs = atom
        .characteristic_frequencies()
        .into_iter()
        .chain(material.characteristic_frequencies());
    match kind {
        ResponseKind::Dielectric => one_frequency_integral(
                |xi| {
                    let e = material.epsilon_ixi(xi)?;
                    Ok(atom.at_ixi(xi) * if e.is_finite() { (e - 1.0) / (e + 1.0) } else { 1.0 })
                },
                -1.0 / (16.0 * PI * PI * z.powi(3)),
                freqs,
                spec,
            ),
        ResponseKind::Magnetic => one_frequency_integral(
                |xi| {
                    let m = material.mu_ixi(xi)?;
                    Ok(xi * xi * atom.at_ixi(xi) * (m - 1.0) * (m + 3.0) / (m + 1.0))
                },
                1.0 / (32.0 * PI * PI * z),
                freqs,
                spec,
            ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinPlateAsymptotes {
    /// None when a static response is infinite (metals).
    pub retarded: Option<f64>,
    pub nonretarded_dielectric: f64,
    pub nonretarded_magnetic: f64,
    /// Set when n(0)d < 0.1 z_A is violated.
    pub regime_warning: bool,
    /// False when a frequency integral missed its tolerance; the values are then best estimates.
    pub converged: bool,
}

/// Potential of a thin plate, n(0)d ≪ z_A, in its retarded and nonretarded limits.
pub fn thin_plate_asymptotes(
    atom: &Polarizability,
    material: &MaterialModel,
    z: f64,
    d: f64,
    spec: &QuadSpec,
) -> Result<ThinPlateAsymptotes> {
    atom.validate()?;
    material.validate()?;
    require(z > 0.0, || format!("atom position must be positive, got {z}"))?;
    require(d > 0.0, || format!("plate thickness must be positive, got {d}"))?;
    let (e0, m0) = (material.epsilon_ixi(0.0)?, material.mu_ixi(0.0)?);
    let n0 = (e0 * m0).sqrt();
    let retarded = (e0.is_finite() && m0.is_finite()).then(|| {
        let bracket = (14.0 * e0 * e0 - 9.0) / e0 - (6.0 * m0 * m0 - 1.0) / m0;
        -atom.static_value() * d / (160.0 * PI * PI * z.powi(5)) * bracket
    });
    let freqs: Vec<f64> = atom
        .characteristic_frequencies()
        .into_iter()
        .chain(material.characteristic_frequencies())
        .collect();
    let mut converged = true;
    let mut best = |r: Result<f64>| match r {
        Err(Error::Convergence { value, .. }) => {
            converged = false;
            Ok(value)
        }
        r => r,
    };
    let electric = best(one_frequency_integral(
        |xi| {
            let e = material.epsilon_ixi(xi)?;
            Ok(atom.at_ixi(xi) * (e * e - 1.0) / e)
        },
        -3.0 * d / (64.0 * PI * PI * z.powi(4)),
        freqs.iter().copied(),
        spec,
    ))?;
    let magnetic = best(one_frequency_integral(
        |xi| {
            let m = material.mu_ixi(xi)?;
            Ok(xi * xi * atom.at_ixi(xi) * (m - 1.0) * (3.0 * m + 1.0) / m)
        },
        d / (64.0 * PI * PI * z * z),
        freqs.iter().copied(),
        spec,
    ))?;
    Ok(ThinPlateAsymptotes {
        retarded,
        nonretarded_dielectric: electric,
        nonretarded_magnetic: magnetic,
        regime_warning: !(n0 * d < 0.1 * z),
        converged,
    })
}

/// Static permeability at which the retarded half-space potential changes
/// sign, for static permittivity `eps`.
pub fn borderline_mu(eps: f64) -> Result<f64> {
    require(eps >= 1.0 && eps.is_finite(), || {
        format!("static permittivity must be finite and at least 1, got {eps}")
    })?;
    if eps == 1.0 {
        return Ok(1.0);
    }
    let f = |mu: f64| retarded_integral_quad(eps, mu).value;
    let mut hi = 8.0 * eps + 8.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoCrossing(eps));
        }
    }
    brent(f, 1.0, hi, 1e-12 * hi, 200).ok_or(Error::NoCrossing(eps))
}

/// The attraction/repulsion borderline μ(0) for each ε(0) in `eps_grid`.
pub fn repulsion_borderline(eps_grid: &[f64]) -> Vec<(f64, Result<f64>)> {
    eps_grid.iter().map(|&e| (e, borderline_mu(e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{drude_lorentz_example, DrudeLorentzParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn atom() -> Polarizability {
        Polarizability::TwoLevel {
            omega10: 1.0,
            alpha0: 1.0,
        }
    }

    #[test]
    fn unconverged_estimates_carry_the_prefactors() {
        let loose = QuadSpec::new(1e-8);
        let tight = QuadSpec::new(1e-16);
        for kind in [MirrorKind::Conductor, MirrorKind::Permeable] {
            let u = cp_potential_perfect_mirror(&atom(), 0.5, kind, &loose).unwrap();
            match cp_potential_perfect_mirror(&atom(), 0.5, kind, &tight) {
                Err(Error::Convergence { value, .. }) => assert_relative_eq!(value, u, max_relative = 1e-6),
                other => panic!("expected a convergence error, got {other:?}"),
            }
            let f = cp_force_perfect_mirror(&atom(), 0.5, kind, &loose).unwrap();
            match cp_force_perfect_mirror(&atom(), 0.5, kind, &tight) {
                Err(Error::Convergence { value, .. }) => assert_relative_eq!(value, f, max_relative = 1e-6),
                other => panic!("expected a convergence error, got {other:?}"),
            }
        }
        let m = MaterialModel::dielectric(DrudeLorentzParams::new(0.75, 1.03, 0.001).unwrap());
        let u = nonretarded_asymptotes(&atom(), &m, 0.01, ResponseKind::Dielectric, &loose).unwrap();
        match nonretarded_asymptotes(&atom(), &m, 0.01, ResponseKind::Dielectric, &tight) {
            Err(Error::Convergence { value, .. }) => assert_relative_eq!(value, u, max_relative = 1e-6),
            other => panic!("expected a convergence error, got {other:?}"),
        }
    }

    fn spec() -> QuadSpec {
        QuadSpec::new(1e-9)
    }

    fn half_space(m: MaterialModel, z: f64) -> AtomScenario {
        AtomScenario::new(atom(), Geometry::HalfSpace(LayerStack::half_space(m)), z).unwrap()
    }

    fn fig3_dielectric() -> MaterialModel {
        MaterialModel::dielectric(DrudeLorentzParams::new(0.75, 1.03, 0.001).unwrap())
    }

    #[test]
    fn trivial_cases_vanish() {
        let s = AtomScenario::new(
            Polarizability::Static(0.0),
            Geometry::HalfSpace(LayerStack::half_space(fig3_dielectric())),
            1.0,
        )
        .unwrap();
        assert_eq!(cp_potential(&s, &spec()).unwrap(), 0.0);
        let v = half_space(MaterialModel::Vacuum, 1.0);
        assert_eq!(cp_potential(&v, &spec().with_floor(1e-30)).unwrap(), 0.0);
    }

    #[test]
    fn general_path_matches_perfect_mirror_kernel() {
        for z in [0.1, 1.0, 10.0] {
            for kind in [MirrorKind::Conductor, MirrorKind::Permeable] {
                let s = half_space(kind.material(), z);
                let full = cp_potential(&s, &spec()).unwrap();
                let closed = cp_potential_perfect_mirror(&atom(), z, kind, &spec()).unwrap();
                assert_relative_eq!(full, closed, max_relative = 1e-7);
            }
        }
        let c = cp_potential_perfect_mirror(&atom(), 0.7, MirrorKind::Conductor, &spec()).unwrap();
        let p = cp_potential_perfect_mirror(&atom(), 0.7, MirrorKind::Permeable, &spec()).unwrap();
        assert_eq!(c, -p);
        assert!(c < 0.0);
    }

    #[test]
    fn perfect_mirror_limits() {
        let z = 50.0;
        let u = cp_potential_perfect_mirror(&atom(), z, MirrorKind::Conductor, &spec()).unwrap();
        let retarded = -3.0 / (32.0 * PI * PI * z.powi(4));
        assert_relative_eq!(u, retarded, max_relative = 0.01);
        let z = 1e-3;
        let u = cp_potential_perfect_mirror(&atom(), z, MirrorKind::Conductor, &spec()).unwrap();
        let lj = -atom().dipole_square().unwrap() / (48.0 * PI * z.powi(3));
        assert_relative_eq!(u, lj, max_relative = 0.01);
        // static α is exactly retarded at every distance
        let u = cp_potential_perfect_mirror(&Polarizability::Static(2.0), 0.3, MirrorKind::Conductor, &spec()).unwrap();
        assert_relative_eq!(u, -6.0 / (32.0 * PI * PI * 0.3f64.powi(4)), max_relative = 1e-10);
    }

    #[test]
    fn dipole_normalisation() {
        let a = Polarizability::from_dipole(2.0, 3.0).unwrap();
        assert_relative_eq!(a.static_value(), 1.0);
        assert_relative_eq!(a.dipole_square().unwrap(), 3.0);
    }

    #[test]
    fn retarded_asymptote_limits() {
        let z = 2.0;
        let pc = cp_retarded_halfspace_asymptote(1.0, 1e10, 1.0, z).unwrap();
        assert_relative_eq!(pc, -3.0 / (32.0 * PI * PI * z.powi(4)), max_relative = 1e-4);
        assert_eq!(cp_retarded_halfspace_asymptote(1.0, 1.0, 1.0, z).unwrap(), 0.0);
        assert!(cp_retarded_halfspace_asymptote(1.0, 1.0, 5.0, z).unwrap() > 0.0);
    }

    #[test]
    fn full_half_space_approaches_its_limits() {
        let m = fig3_dielectric();
        let e0 = m.epsilon_ixi(0.0).unwrap();
        let z = 50.0 / 0.75;
        let u = cp_potential(&half_space(m, z), &spec()).unwrap();
        let ret = cp_retarded_halfspace_asymptote(1.0, e0, 1.0, z).unwrap();
        assert_relative_eq!(u, ret, max_relative = 0.03);
        let z = 1e-3 / 1.25;
        let u = cp_potential(&half_space(m, z), &spec()).unwrap();
        let nr = nonretarded_asymptotes(&atom(), &m, z, ResponseKind::Dielectric, &spec()).unwrap();
        assert_relative_eq!(u, nr, max_relative = 0.01);
    }

    #[test]
    fn nonretarded_dielectric_matches_trapezoid_oracle() {
        let m = fig3_dielectric();
        let z = 0.01;
        let got = nonretarded_asymptotes(&atom(), &m, z, ResponseKind::Dielectric, &spec()).unwrap();
        let e0 = m.epsilon_ixi(0.0).unwrap();
        // ξ = tan θ, trapezoid in θ with Richardson extrapolation
        let trap = |n: usize| {
            let h = 0.5 * PI / n as f64;
            (1..n)
                .map(|i| {
                    let t = i as f64 * h;
                    let xi = t.tan();
                    let e = m.epsilon_ixi(xi).unwrap();
                    atom().at_ixi(xi) * (e - 1.0) / (e + 1.0) / t.cos().powi(2)
                })
                .sum::<f64>()
                * h
                + 0.5 * h * atom().at_ixi(0.0) * (e0 - 1.0) / (e0 + 1.0)
        };
        let oracle = (4.0 * trap(8000) - trap(4000)) / 3.0;
        assert_relative_eq!(got, -oracle / (16.0 * PI * PI * z.powi(3)), max_relative = 1e-5);
    }

    #[test]
    fn nonretarded_limits_of_the_limits() {
        let z: f64 = 0.2;
        let lj = -atom().dipole_square().unwrap() / (48.0 * PI * z.powi(3));
        let metal_like = MaterialModel::constant(1e9, 1.0).unwrap();
        let u = nonretarded_asymptotes(&atom(), &metal_like, z, ResponseKind::Dielectric, &spec()).unwrap();
        assert_relative_eq!(u, lj, max_relative = 1e-6);
        let nothing = MaterialModel::constant(1.0, 1.0).unwrap();
        assert_eq!(
            nonretarded_asymptotes(&atom(), &nothing, z, ResponseKind::Magnetic, &spec().with_floor(1e-30)).unwrap(),
            0.0
        );
        let mag = MaterialModel::magnetic(DrudeLorentzParams::with_static_value(5.0, 1.0, 0.001).unwrap());
        assert!(nonretarded_asymptotes(&atom(), &mag, z, ResponseKind::Magnetic, &spec()).unwrap() > 0.0);
        assert!(nonretarded_asymptotes(&atom(), &mag, z, ResponseKind::Dielectric, &spec()).is_err());
    }

    #[test]
    fn thin_plate_forms() {
        let vac = MaterialModel::constant(1.0, 1.0).unwrap();
        let t = thin_plate_asymptotes(&atom(), &vac, 1.0, 0.01, &spec().with_floor(1e-30)).unwrap();
        assert_eq!(t.retarded, Some(0.0));
        let glass = MaterialModel::constant(2.0, 1.0).unwrap();
        let (z, d) = (10.0, 0.01);
        let t = thin_plate_asymptotes(&atom(), &glass, z, d, &spec()).unwrap();
        assert_relative_eq!(t.retarded.unwrap(), -18.5 * d / (160.0 * PI * PI * z.powi(5)), max_relative = 1e-14);
        assert!(!t.regime_warning);
        assert!(thin_plate_asymptotes(&atom(), &glass, 0.01, 0.01, &spec()).unwrap().regime_warning);
    }

    #[test]
    fn thin_plate_potential_approaches_retarded_form() {
        let glass = MaterialModel::constant(2.0, 1.0).unwrap();
        let d = 0.01;
        let mut last = f64::INFINITY;
        for z in [5.0, 20.0, 80.0] {
            let s = AtomScenario::new(atom(), Geometry::Plate { material: glass, thickness: d }, z).unwrap();
            let u = cp_potential(&s, &spec()).unwrap();
            let t = thin_plate_asymptotes(&atom(), &glass, z, d, &spec()).unwrap();
            let dev = (u / t.retarded.unwrap() - 1.0).abs();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn force_is_minus_gradient() {
        let scenarios = [
            half_space(fig3_dielectric(), 0.5),
            half_space(drude_lorentz_example(5.0).unwrap(), 2.0),
            AtomScenario::new(
                atom(),
                Geometry::Plate {
                    material: drude_lorentz_example(3.0).unwrap(),
                    thickness: 0.3,
                },
                0.8,
            )
            .unwrap(),
            AtomScenario::new(
                atom(),
                Geometry::Cavity {
                    left: LayerStack::half_space(fig3_dielectric()),
                    right: LayerStack::half_space(MaterialModel::constant(3.0, 1.0).unwrap()),
                    width: 2.0,
                },
                0.6,
            )
            .unwrap(),
        ];
        let tight = QuadSpec::new(1e-11);
        for s in scenarios {
            let f = cp_force(&s, &tight).unwrap();
            let u = |z: f64| cp_potential(&s.with_z(z), &tight).unwrap();
            let central = |h: f64| -(u(s.z + h) - u(s.z - h)) / (2.0 * h);
            let h = 0.005 * s.z;
            let fd = (4.0 * central(h / 2.0) - central(h)) / 3.0;
            assert_relative_eq!(f, fd, max_relative = 1e-6);
        }
        let f = cp_force_perfect_mirror(&atom(), 50.0, MirrorKind::Conductor, &spec()).unwrap();
        assert_relative_eq!(f, -12.0 / (32.0 * PI * PI * 50f64.powi(5)), max_relative = 0.02);
    }

    #[test]
    fn symmetric_cavity_centre_has_no_force() {
        let wall = LayerStack::half_space(fig3_dielectric());
        let s = AtomScenario::new(
            atom(),
            Geometry::Cavity {
                left: wall.clone(),
                right: wall,
                width: 1.0,
            },
            0.5,
        )
        .unwrap();
        let f = cp_force(&s, &spec()).unwrap();
        let u = cp_potential(&s, &spec()).unwrap();
        assert!(f.abs() < 1e-12 * u.abs());
    }

    #[test]
    fn single_reflection_cavity_is_sum_of_walls() {
        let left = LayerStack::half_space(fig3_dielectric());
        let right = LayerStack::half_space(drude_lorentz_example(4.0).unwrap());
        let (d, z) = (1.5, 0.4);
        let cavity = AtomScenario::new(
            atom(),
            Geometry::Cavity {
                left: left.clone(),
                right: right.clone(),
                width: d,
            },
            z,
        )
        .unwrap();
        // integrand level: exact up to rounding
        let pc = cavity.planar().unwrap();
        let pl = PlanarScenario::vacuum_gap(left.clone(), LayerStack::vacuum(), d).unwrap();
        let pr = PlanarScenario::vacuum_gap(LayerStack::vacuum(), right.clone(), d).unwrap();
        for xi in [0.1, 1.0, 3.0] {
            let (cc, cl, cr) = (
                CavityAtXi::new(&pc, xi).unwrap(),
                CavityAtXi::new(&pl, xi).unwrap(),
                CavityAtXi::new(&pr, xi).unwrap(),
            );
            for q in [0.05, 0.7, 4.0] {
                let both = cc.cp_bracket(&cc.point(q).unwrap(), z, false);
                let sum = cl.cp_bracket(&cl.point(q).unwrap(), z, true) + cr.cp_bracket(&cr.point(q).unwrap(), z, true);
                assert_relative_eq!(both, sum, max_relative = 4.0 * f64::EPSILON);
            }
        }
        let single = cp_potential_with(&cavity, &spec(), Reflections::Single).unwrap();
        let l = cp_potential(&AtomScenario::new(atom(), Geometry::HalfSpace(left), z).unwrap(), &spec()).unwrap();
        let mirror_right = AtomScenario::new(atom(), Geometry::HalfSpace(right), d - z).unwrap();
        let r = cp_potential(&mirror_right, &spec()).unwrap();
        assert_relative_eq!(single, l + r, max_relative = 1e-8);
        let multiple = cp_potential(&cavity, &spec()).unwrap();
        assert!((multiple - single).abs() > 1e-6 * single.abs());
    }

    #[test]
    fn borderline_slopes() {
        let delta = 1e-3;
        let mu = borderline_mu(1.0 + delta).unwrap();
        assert_relative_eq!((mu - 1.0) / delta, 3.29, max_relative = 0.02);
        let eps = 1e4;
        let mu = borderline_mu(eps).unwrap();
        assert_relative_eq!(mu / eps, 5.11, max_relative = 0.02);
        assert_eq!(borderline_mu(1.0).unwrap(), 1.0);
        for e in [1.5, 3.0, 10.0] {
            assert!(retarded_halfspace_integral(e, e).unwrap() > 0.0);
            let mu = borderline_mu(e).unwrap();
            assert!(retarded_halfspace_integral(e, mu).unwrap().abs() < 1e-12);
        }
        let rows = repulsion_borderline(&[1.0, 2.0]);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|(_, r)| r.is_ok()));
        assert!(borderline_mu(0.5).is_err());
    }

    #[test]
    fn barrier_forms_for_strong_magnetic_response() {
        let zs = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0];
        let weak: Vec<f64> = zs
            .iter()
            .map(|&z| cp_potential(&half_space(drude_lorentz_example(1.0).unwrap(), z), &spec()).unwrap())
            .collect();
        assert!(weak.iter().all(|&u| u < 0.0));
        assert!(weak.windows(2).all(|w| w[1] > w[0]));
        let strong: Vec<f64> = zs
            .iter()
            .map(|&z| cp_potential(&half_space(drude_lorentz_example(5.0).unwrap(), z), &spec()).unwrap())
            .collect();
        assert!(strong[0] < 0.0);
        let peak = strong.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(peak > 0.0);
        assert!(strong.last().unwrap() < &peak);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dielectric_walls_attract(wp in 0.1f64..3.0, wt in 0.2f64..3.0, z in 0.01f64..20.0) {
            let m = MaterialModel::dielectric(DrudeLorentzParams::new(wp, wt, 0.01).unwrap());
            let u = cp_potential(&half_space(m, z), &QuadSpec::new(1e-6)).unwrap();
            prop_assert!(u < 0.0);
        }

        #[test]
        fn permeable_mirror_repels(w in 0.1f64..10.0, a in 0.01f64..10.0, z in 0.001f64..100.0) {
            let atom = Polarizability::TwoLevel { omega10: w, alpha0: a };
            let u = cp_potential_perfect_mirror(&atom, z, MirrorKind::Permeable, &QuadSpec::new(1e-6)).unwrap();
            prop_assert!(u > 0.0);
        }
    }
}
