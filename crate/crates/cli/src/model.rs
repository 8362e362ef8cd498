//! Resolution of a parsed scenario into core objects.

use std::fmt;

use dispersion::cp::{Magnetizability, MirrorKind};
use dispersion::{
    AtomPair, AtomScenario, DrudeLorentzParams, Geometry, Layer, LayerStack, MaterialModel,
    PlanarScenario, Polarizability, QuasiMode, TemperatureSpec, TwoLevelNearHalfSpace,
    ZeroFrequency,
};
use nalgebra::Vector3;

use crate::scenario::{
    AtomSpec, Command, GeometrySpec, MaterialSpec, Scenario, StackSpec, ZeroFrequencyRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Malformed or incomplete input (exit 1).
    Input,
    /// Well-formed input outside the physical domain (exit 3).
    Domain,
}

/// A resolution failure tied to a section and, optionally, a key.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub kind: ProblemKind,
    pub section: String,
    pub key: Option<String>,
    pub message: String,
}

impl Problem {
    pub fn input(section: &str, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            kind: ProblemKind::Input,
            section: section.into(),
            key: key.map(Into::into),
            message: message.into(),
        }
    }

    pub fn domain(section: &str, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            kind: ProblemKind::Domain,
            ..Self::input(section, key, message)
        }
    }

    fn missing(section: &str, key: &str) -> Self {
        Self::input(section, Some(key), format!("missing `{key}` in [{section}]"))
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn domain_err<'a>(section: &'a str, key: Option<&'a str>) -> impl Fn(dispersion::Error) -> Problem + 'a {
    move |e| Problem::domain(section, key, e.to_string())
}

fn need<T: Copy>(v: Option<T>, section: &str, key: &str) -> Result<T, Problem> {
    v.ok_or_else(|| Problem::missing(section, key))
}

fn unused(section: &str, pairs: &[(&str, bool)]) -> Result<(), Problem> {
    for (key, present) in pairs {
        if *present {
            return Err(Problem::input(section, Some(key), format!("`{key}` is not used by this model")));
        }
    }
    Ok(())
}

fn drude_lorentz(
    section: &str,
    prefix: &str,
    plasma: Option<f64>,
    stat: Option<f64>,
    resonance: Option<f64>,
    damping: Option<f64>,
) -> Result<DrudeLorentzParams, Problem> {
    let damping = damping.unwrap_or(0.0);
    match (plasma, stat) {
        (Some(_), Some(_)) => Err(Problem::input(
            section,
            Some(&format!("{prefix}_static")),
            format!("give either {prefix}_plasma or {prefix}_static, not both"),
        )),
        (Some(p), None) => DrudeLorentzParams::new(p, resonance.unwrap_or(0.0), damping)
            .map_err(|e| Problem::domain(section, Some(&format!("{prefix}_plasma")), e.to_string())),
        (None, Some(s)) => {
            let key = format!("{prefix}_resonance");
            let r = need(resonance, section, &key)?;
            DrudeLorentzParams::with_static_value(s, r, damping)
                .map_err(|e| Problem::domain(section, Some(&format!("{prefix}_static")), e.to_string()))
        }
        (None, None) => {
            unused(section, &[
                (&format!("{prefix}_resonance"), resonance.is_some()),
                (&format!("{prefix}_damping"), damping != 0.0),
            ])?;
            Ok(DrudeLorentzParams::none())
        }
    }
}

pub fn material(name: &str, spec: &MaterialSpec) -> Result<MaterialModel, Problem> {
    let section = format!("materials.{name}");
    let s = section.as_str();
    let dl_keys = [
        ("eps_plasma", spec.eps_plasma.is_some()),
        ("eps_static", spec.eps_static.is_some()),
        ("eps_resonance", spec.eps_resonance.is_some()),
        ("eps_damping", spec.eps_damping.is_some()),
        ("mu_plasma", spec.mu_plasma.is_some()),
        ("mu_static", spec.mu_static.is_some()),
        ("mu_resonance", spec.mu_resonance.is_some()),
        ("mu_damping", spec.mu_damping.is_some()),
    ];
    let const_keys = [("eps", spec.eps.is_some()), ("mu", spec.mu.is_some())];
    match spec.model.as_str() {
        "vacuum" | "perfect-conductor" | "perfectly-permeable" => {
            unused(s, &const_keys)?;
            unused(s, &dl_keys)?;
            Ok(match spec.model.as_str() {
                "vacuum" => MaterialModel::Vacuum,
                "perfect-conductor" => MaterialModel::PerfectConductor,
                _ => MaterialModel::PerfectlyPermeable,
            })
        }
        "constant" => {
            unused(s, &dl_keys)?;
            MaterialModel::constant(spec.eps.unwrap_or(1.0), spec.mu.unwrap_or(1.0))
                .map_err(domain_err(s, Some("eps")))
        }
        "drude-lorentz" => {
            unused(s, &const_keys)?;
            let permittivity = drude_lorentz(
                s,
                "eps",
                spec.eps_plasma,
                spec.eps_static,
                spec.eps_resonance,
                spec.eps_damping,
            )?;
            let permeability = drude_lorentz(
                s,
                "mu",
                spec.mu_plasma,
                spec.mu_static,
                spec.mu_resonance,
                spec.mu_damping,
            )?;
            let m = MaterialModel::DrudeLorentz {
                permittivity,
                permeability,
            };
            m.validate().map_err(domain_err(s, Some("model")))?;
            Ok(m)
        }
        other => Err(Problem::input(s, Some("model"), format!("unknown material model `{other}`"))),
    }
}

/// Every material reference in the scenario resolves, plus per-definition checks.
pub struct Resolver<'a> {
    pub scenario: &'a Scenario,
}

impl<'a> Resolver<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self { scenario }
    }

    pub fn material(&self, name: &str, section: &str, key: &str) -> Result<MaterialModel, Problem> {
        let spec = self.scenario.materials.get(name).ok_or_else(|| {
            Problem::input(section, Some(key), format!("unresolved material reference `{name}`"))
        })?;
        material(name, spec)
    }

    pub fn stack(&self, name: &str, section: &str, key: &str) -> Result<LayerStack, Problem> {
        let spec = self.scenario.stacks.get(name).ok_or_else(|| {
            Problem::input(section, Some(key), format!("unresolved stack reference `{name}`"))
        })?;
        self.build_stack(name, spec)
    }

    pub fn build_stack(&self, name: &str, spec: &StackSpec) -> Result<LayerStack, Problem> {
        let section = format!("stacks.{name}");
        let s = section.as_str();
        if spec.layers.is_empty() {
            return Err(Problem::input(s, Some("layers"), "a stack needs at least one layer"));
        }
        if spec.thicknesses.len() + 1 != spec.layers.len() {
            return Err(Problem::input(
                s,
                Some("thicknesses"),
                format!(
                    "{} layers need {} thicknesses (the last layer is semi-infinite), got {}",
                    spec.layers.len(),
                    spec.layers.len() - 1,
                    spec.thicknesses.len()
                ),
            ));
        }
        let mut layers = Vec::with_capacity(spec.layers.len());
        for (i, m) in spec.layers.iter().enumerate() {
            let model = self.material(m, s, "layers")?;
            layers.push(match spec.thicknesses.get(i) {
                Some(&t) => Layer::finite(model, t),
                None => Layer::semi_infinite(model),
            });
        }
        LayerStack::new(layers).map_err(|e| match e {
            dispersion::Error::InvalidStack(msg) => {
                Problem::domain(s, Some("layers"), format!("invalid stack: {msg}"))
            }
            e => Problem::domain(s, Some("thicknesses"), e.to_string()),
        })
    }

    fn atom_spec(&self, section: &str) -> Result<&'a AtomSpec, Problem> {
        let spec = match section {
            "partner" => self.scenario.partner.as_ref(),
            _ => self.scenario.atom.as_ref(),
        };
        spec.ok_or_else(|| Problem::input(section, None, format!("missing [{section}] section")))
    }

    pub fn atom(&self, section: &str) -> Result<Polarizability, Problem> {
        let spec = self.atom_spec(section)?;
        let s = section;
        let lists = [
            ("frequencies", !spec.frequencies.is_empty()),
            ("strengths", !spec.strengths.is_empty()),
        ];
        let atom = match spec.model.as_str() {
            "static" => {
                unused(s, &lists)?;
                unused(s, &[("omega10", spec.omega10.is_some()), ("dipole_sq", spec.dipole_sq.is_some())])?;
                Polarizability::Static(need(spec.alpha0, s, "alpha0")?)
            }
            "two-level" => {
                unused(s, &lists)?;
                let omega10 = need(spec.omega10, s, "omega10")?;
                match (spec.alpha0, spec.dipole_sq) {
                    (Some(alpha0), None) => Polarizability::TwoLevel { omega10, alpha0 },
                    (None, Some(d2)) => Polarizability::from_dipole(omega10, d2)
                        .map_err(domain_err(s, Some("dipole_sq")))?,
                    (Some(_), Some(_)) => {
                        return Err(Problem::input(s, Some("dipole_sq"), "give either alpha0 or dipole_sq, not both"))
                    }
                    (None, None) => return Err(Problem::missing(s, "alpha0")),
                }
            }
            "multi-oscillator" => {
                unused(s, &[
                    ("alpha0", spec.alpha0.is_some()),
                    ("omega10", spec.omega10.is_some()),
                    ("dipole_sq", spec.dipole_sq.is_some()),
                ])?;
                if spec.frequencies.len() != spec.strengths.len() || spec.frequencies.is_empty() {
                    return Err(Problem::input(s, Some("strengths"), "frequencies and strengths must be non-empty and of equal length"));
                }
                Polarizability::MultiOscillator(
                    spec.frequencies.iter().copied().zip(spec.strengths.iter().copied()).collect(),
                )
            }
            other => return Err(Problem::input(s, Some("model"), format!("unknown atom model `{other}`"))),
        };
        atom.validate().map_err(domain_err(s, Some("model")))?;
        Ok(atom)
    }

    fn magnetic_partner(&self) -> Result<bool, Problem> {
        match self.atom_spec("partner")?.coupling.as_deref() {
            None | Some("electric") => Ok(false),
            Some("magnetic") => Ok(true),
            Some(other) => Err(Problem::input("partner", Some("coupling"), format!("unknown coupling `{other}`"))),
        }
    }

    fn geometry_spec(&self) -> Result<&'a GeometrySpec, Problem> {
        self.scenario
            .geometry
            .as_ref()
            .ok_or_else(|| Problem::input("geometry", None, "missing [geometry] section"))
    }

    pub fn geometry(&self) -> Result<Geometry, Problem> {
        let g = self.geometry_spec()?;
        let s = "geometry";
        let name = |v: &Option<String>, key: &str| -> Result<String, Problem> {
            v.clone().ok_or_else(|| Problem::missing(s, key))
        };
        match g.kind.as_str() {
            "half-space" => Ok(Geometry::HalfSpace(self.stack(&name(&g.stack, "stack")?, s, "stack")?)),
            "plate" => {
                let material = self.material(&name(&g.material, "material")?, s, "material")?;
                let thickness = need(g.thickness, s, "thickness")?;
                LayerStack::slab(material, thickness).map_err(domain_err(s, Some("thickness")))?;
                Ok(Geometry::Plate { material, thickness })
            }
            "cavity" => Ok(Geometry::Cavity {
                left: self.stack(&name(&g.left, "left")?, s, "left")?,
                right: self.stack(&name(&g.right, "right")?, s, "right")?,
                width: need(g.width, s, "width")?,
            }),
            "ideal-mirror" => match g.mirror.as_deref() {
                Some("conductor") => Ok(Geometry::IdealMirror(MirrorKind::Conductor)),
                Some("permeable") => Ok(Geometry::IdealMirror(MirrorKind::Permeable)),
                Some(other) => Err(Problem::input(s, Some("mirror"), format!("unknown mirror `{other}`"))),
                None => Err(Problem::missing(s, "mirror")),
            },
            other => Err(Problem::input(s, Some("kind"), format!("unknown geometry `{other}`"))),
        }
    }

    fn zero_frequency(&self) -> ZeroFrequency {
        match self.scenario.run.zero_frequency {
            ZeroFrequencyRule::Drude => ZeroFrequency::Drude,
            ZeroFrequencyRule::Plasma => ZeroFrequency::Plasma,
        }
    }

    /// The walls of `casimir-pressure`, with the width set by the sweep.
    pub fn cavity(&self) -> Result<PlanarScenario, Problem> {
        let g = self.geometry_spec()?;
        let s = "geometry";
        if g.kind != "cavity" {
            return Err(Problem::input(s, Some("kind"), "casimir-pressure needs a cavity geometry"));
        }
        let left = self.stack(g.left.as_deref().ok_or_else(|| Problem::missing(s, "left"))?, s, "left")?;
        let right = self.stack(g.right.as_deref().ok_or_else(|| Problem::missing(s, "right"))?, s, "right")?;
        let inter = match &g.interspace {
            Some(m) => self.material(m, s, "interspace")?,
            None => MaterialModel::Vacuum,
        };
        let width = g.width.unwrap_or(1.0);
        PlanarScenario::new(left, right, inter, width)
            .map(|p| p.with_zero_frequency(self.zero_frequency()))
            .map_err(domain_err(s, Some("interspace")))
    }

    pub fn temperature(&self) -> Result<TemperatureSpec, Problem> {
        let t = self.scenario.run.temperature;
        let spec = if t == 0.0 {
            TemperatureSpec::Zero
        } else {
            TemperatureSpec::Finite(t)
        };
        spec.validate().map_err(domain_err("run", Some("temperature")))?;
        Ok(spec)
    }

    pub fn atom_scenario(&self, sweep_z: bool) -> Result<AtomScenario, Problem> {
        let atom = self.atom("atom")?;
        let geometry = self.geometry()?;
        let z = if sweep_z {
            match &geometry {
                Geometry::Cavity { width, .. } => width / 2.0,
                _ => 1.0,
            }
        } else {
            need(self.geometry_spec()?.z, "geometry", "z")?
        };
        AtomScenario::new(atom, geometry, z).map_err(domain_err("geometry", Some("z")))
    }

    pub fn pair(&self) -> Result<(AtomPair, bool), Problem> {
        let a = self.atom("atom")?;
        let b: Magnetizability = self.atom("partner")?;
        let magnetic = self.magnetic_partner()?;
        Ok((AtomPair::new(a, b, 1.0).map_err(domain_err("partner", None))?, magnetic))
    }

    pub fn cluster(&self) -> Result<(Vec<Vector3<f64>>, Vec<Polarizability>), Problem> {
        let c = self
            .scenario
            .cluster
            .as_ref()
            .ok_or_else(|| Problem::input("cluster", None, "missing [cluster] section"))?;
        let atom = self.atom("atom")?;
        let n = c.positions.len();
        if !(2..=dispersion::vdw::MAX_ATOMS).contains(&n) {
            return Err(Problem::domain(
                "cluster",
                Some("positions"),
                format!("between 2 and {} atoms are supported, got {n}", dispersion::vdw::MAX_ATOMS),
            ));
        }
        let positions = c.positions.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect();
        Ok((positions, vec![atom; n]))
    }

    pub fn transition(&self, sweep: &str) -> Result<TwoLevelNearHalfSpace, Problem> {
        let t = self
            .scenario
            .transition
            .as_ref()
            .ok_or_else(|| Problem::input("transition", None, "missing [transition] section"))?;
        let s = "transition";
        let material = self.material(&t.material, s, "material")?;
        let omega10 = if sweep == "omega10" { 1.0 } else { need(t.omega10, s, "omega10")? };
        let z = if sweep == "z" { 1e-3 } else { need(t.z, s, "z")? };
        TwoLevelNearHalfSpace::new(omega10, t.dipole_weight, material, z)
            .map_err(domain_err(s, Some("material")))
    }

    pub fn mode(&self) -> Result<(QuasiMode, f64), Problem> {
        let m = self
            .scenario
            .mode
            .as_ref()
            .ok_or_else(|| Problem::input("mode", None, "missing [mode] section"))?;
        let mode = QuasiMode {
            omega_nu: m.omega_nu,
            gamma_nu: m.gamma_nu,
            rabi: m.rabi,
            residual_width: m.residual_width,
            residual_shift: m.residual_shift,
            transition_frequency: m.transition_frequency,
        };
        mode.validate().map_err(domain_err("mode", None))?;
        Ok((mode, m.force))
    }

    /// Checks on `[run]` that do not depend on the command.
    pub fn run_checks(&self, command: Command) -> Result<String, Problem> {
        let run = &self.scenario.run;
        let s = "run";
        if let Some(c) = run.command {
            if c != command {
                return Err(Problem::input(s, Some("command"), format!("scenario is written for `{c}`, not `{command}`")));
            }
        }
        if !(run.from.is_finite() && run.to.is_finite() && run.from >= 0.0) {
            return Err(Problem::input(s, Some("from"), "sweep range must be finite and non-negative"));
        }
        if run.to < run.from || (run.to == run.from && run.points > 1) {
            return Err(Problem::input(s, Some("to"), "sweep range must be ordered, from < to"));
        }
        if run.points == 0 {
            return Err(Problem::input(s, Some("points"), "at least one sweep point is needed"));
        }
        if run.spacing == crate::scenario::Spacing::Log && run.from <= 0.0 {
            return Err(Problem::input(s, Some("from"), "logarithmic spacing needs from > 0"));
        }
        if !(run.tol > 0.0 && run.tol < 1.0) {
            return Err(Problem::input(s, Some("tol"), "tolerance must lie in (0, 1)"));
        }
        match run.omega_ref {
            Some(w) if !(w > 0.0 && w.is_finite()) => {
                return Err(Problem::input(s, Some("omega_ref"), "omega_ref must be a positive frequency in rad/s"))
            }
            None if run.si_output => {
                return Err(Problem::input(s, Some("si_output"), "SI output needs omega_ref in rad/s"))
            }
            _ => {}
        }
        if run.series.is_some() != !run.series_values.is_empty() {
            return Err(Problem::input(s, Some("series"), "series and series_values go together"));
        }
        let allowed = match command {
            Command::PowerlawFit => {
                let target = run
                    .target
                    .ok_or_else(|| Problem::missing(s, "target"))?;
                if matches!(target, Command::PowerlawFit | Command::Borderline | Command::DynamicsEvolve) {
                    return Err(Problem::input(s, Some("target"), format!("`{target}` has no power law to fit")));
                }
                target.sweep_variables()
            }
            c => c.sweep_variables(),
        };
        let sweep = run.sweep.clone().unwrap_or_else(|| allowed[0].to_string());
        if !allowed.contains(&sweep.as_str()) {
            return Err(Problem::input(s, Some("sweep"), format!("`{command}` cannot sweep `{sweep}`; expected one of {allowed:?}")));
        }
        Ok(sweep)
    }
}
