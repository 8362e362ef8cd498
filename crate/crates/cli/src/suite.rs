//! The reference tables: attraction/repulsion borderline, ground-state
//! potentials near a half space, plate and cavity, the resonant and
//! off-resonant forces on an excited atom, and the power-law table.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::output::{format_value, render_csv, TOOL};
use crate::scenario::{
    AtomSpec, Command, GeometrySpec, MaterialSpec, Run, Scenario, Spacing, StackSpec,
    TransitionSpec,
};
use crate::{run_scenario, Failure};

pub const FILES: [&str; 7] = [
    "fig2_borderline.csv",
    "fig3_cp_halfspace.csv",
    "fig4_cp_plate.csv",
    "fig5_cp_cavity.csv",
    "fig6_resonant_force.csv",
    "fig7_offresonant_force.csv",
    "table1_power_laws.csv",
];

/// Dielectric part ω_Pe = 0.75, ω_Te = 1.03, γ = 10⁻³ with an optional
/// magnetic resonance at ω_Tm = 1 of static permeability `mu0`.
pub fn magneto_dielectric(eps: bool, mu0: Option<f64>) -> MaterialSpec {
    let mut m = MaterialSpec {
        model: "drude-lorentz".into(),
        ..Default::default()
    };
    if eps {
        m.eps_plasma = Some(0.75);
        m.eps_resonance = Some(1.03);
        m.eps_damping = Some(0.001);
    }
    if let Some(mu0) = mu0 {
        m.mu_static = Some(mu0);
        m.mu_resonance = Some(1.0);
        m.mu_damping = Some(0.001);
    }
    m
}

pub fn two_level_atom() -> AtomSpec {
    AtomSpec {
        model: "two-level".into(),
        omega10: Some(1.0),
        alpha0: Some(1.0),
        ..Default::default()
    }
}

fn half_stack(material: &str) -> StackSpec {
    StackSpec {
        layers: vec![material.into()],
        thicknesses: vec![],
    }
}

fn half_space(scn: &mut Scenario, name: &str, m: MaterialSpec) {
    scn.materials.insert(name.into(), m);
    scn.stacks.insert("wall".into(), half_stack(name));
    scn.geometry = Some(GeometrySpec {
        kind: "half-space".into(),
        stack: Some("wall".into()),
        ..Default::default()
    });
}

fn with_series(mut run: Run, path: &str, values: Vec<toml::Value>) -> Run {
    run.series = Some(path.into());
    run.series_values = values;
    run
}

fn floats(v: &[f64]) -> Vec<toml::Value> {
    v.iter().map(|&x| toml::Value::Float(x)).collect()
}

pub fn fig2() -> Scenario {
    Scenario::new(Run::new(Command::Borderline, 1.001, 1000.0, 121))
}

pub fn fig3() -> Scenario {
    let run = with_series(
        Run::new(Command::CpPotential, 0.01, 10.0, 200),
        "materials.wall.mu_static",
        floats(&[1.0, 3.0, 5.0, 7.0]),
    );
    let mut s = Scenario::new(run);
    s.atom = Some(two_level_atom());
    half_space(&mut s, "wall", magneto_dielectric(true, Some(5.0)));
    s
}

pub fn fig4() -> Scenario {
    let run = with_series(
        Run::new(Command::CpPotential, 0.01, 10.0, 200),
        "geometry.thickness",
        floats(&[0.01, 0.1, 1.0, 10.0]),
    );
    let mut s = Scenario::new(run);
    s.atom = Some(two_level_atom());
    s.materials.insert("plate".into(), magneto_dielectric(true, Some(5.0)));
    s.geometry = Some(GeometrySpec {
        kind: "plate".into(),
        material: Some("plate".into()),
        thickness: Some(1.0),
        ..Default::default()
    });
    s
}

pub fn fig5() -> Scenario {
    let mut run = Run::new(Command::CpPotential, 0.25, 14.75, 117);
    run.spacing = Spacing::Linear;
    let run = with_series(
        run,
        "stacks.wall.layers",
        ["magneto_dielectric", "dielectric", "magnetic"]
            .iter()
            .map(|m| toml::Value::Array(vec![toml::Value::String(m.to_string())]))
            .collect(),
    );
    let mut s = Scenario::new(run);
    s.atom = Some(two_level_atom());
    s.materials.insert("magneto_dielectric".into(), magneto_dielectric(true, Some(5.0)));
    s.materials.insert("dielectric".into(), magneto_dielectric(true, None));
    s.materials.insert("magnetic".into(), magneto_dielectric(false, Some(5.0)));
    s.stacks.insert("wall".into(), half_stack("magneto_dielectric"));
    s.geometry = Some(GeometrySpec {
        kind: "cavity".into(),
        left: Some("wall".into()),
        right: Some("wall".into()),
        width: Some(15.0),
        ..Default::default()
    });
    s
}

/// Excited-atom parameters: ω_Pe = 0.75, γ_e = 0.01 (units of ω_Te),
/// D ω_Te²/3π = 10⁻⁷ and z_A = 0.0075 λ_Te.
pub fn excited(command: Command) -> Scenario {
    let mut run = Run::new(command, 1.0, 1.3, 301);
    run.spacing = Spacing::Linear;
    let mut s = Scenario::new(run);
    s.materials.insert(
        "dielectric".into(),
        MaterialSpec {
            model: "drude-lorentz".into(),
            eps_plasma: Some(0.75),
            eps_resonance: Some(1.0),
            eps_damping: Some(0.01),
            ..Default::default()
        },
    );
    s.transition = Some(TransitionSpec {
        omega10: None,
        dipole_weight: 3.0 * PI * 1e-7,
        material: "dielectric".into(),
        z: Some(0.0075 * 2.0 * PI),
    });
    s
}

/// One power-law case: a `powerlaw-fit` scenario and the tabulated force law.
#[derive(Debug, Clone)]
pub struct PowerLawCase {
    pub id: String,
    pub row: char,
    pub coupling: &'static str,
    pub regime: &'static str,
    /// Exponent of the force (force per area for two half spaces).
    pub force_exponent: i32,
    /// +1 repulsive, −1 attractive.
    pub sign: i32,
    pub scenario: Scenario,
}

impl PowerLawCase {
    /// Exponent of the fitted quantity: potentials fall one power slower
    /// than forces; the half-space pressure is itself a force per area.
    pub fn expected_slope(&self) -> f64 {
        match self.row {
            'f' => self.force_exponent as f64,
            _ => (self.force_exponent + 1) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawRow {
    pub id: String,
    pub expected: f64,
    pub fitted: f64,
    pub sign_ok: bool,
    pub nonconverged: bool,
}

impl PowerLawRow {
    pub fn deviation(&self) -> f64 {
        self.fitted - self.expected
    }
}

const FIT_POINTS: usize = 9;
const FIT_TOL: f64 = 1e-8;

fn window(regime: &str, lo: f64, hi: f64) -> (f64, f64) {
    match regime {
        "retarded" => (50.0 / lo, 500.0 / lo),
        _ => (1e-4 / hi, 1e-3 / hi),
    }
}

fn fit_run(target: Command, (from, to): (f64, f64)) -> Run {
    let mut run = Run::new(Command::PowerlawFit, from, to, FIT_POINTS);
    run.target = Some(target);
    run.tol = FIT_TOL;
    run
}

/// The rows (a), (e) and (f) of the power-law table, each in both coupling
/// columns and both distance regimes.
pub fn power_law_cases() -> Vec<PowerLawCase> {
    let mut out = Vec::new();
    let magnetic = magneto_dielectric(false, Some(5.0));
    let dielectric = magneto_dielectric(true, None);
    // extremal medium and atom frequencies: ω_P = 0.75 (electric), 2 (magnetic)
    let freq = |pm: bool| if pm { (0.75, 2.0) } else { (0.75, 1.03) };
    for (regime, ret) in [("retarded", true), ("nonretarded", false)] {
        for (coupling, pm) in [("pp", false), ("pm", true)] {
            let mut a = Scenario::new(fit_run(Command::VdwPair, window(regime, 1.0, 1.0)));
            a.atom = Some(two_level_atom());
            a.partner = Some(AtomSpec {
                coupling: pm.then(|| "magnetic".into()),
                ..two_level_atom()
            });
            let (exp_a, sign) = match (ret, pm) {
                (true, _) => (-8, if pm { 1 } else { -1 }),
                (false, false) => (-7, -1),
                (false, true) => (-5, 1),
            };
            out.push(PowerLawCase {
                id: String::new(),
                row: 'a',
                coupling,
                regime,
                force_exponent: exp_a,
                sign,
                scenario: a,
            });

            let (lo, hi) = freq(pm);
            let mut e = Scenario::new(fit_run(Command::CpPotential, window(regime, lo, hi)));
            e.atom = Some(two_level_atom());
            half_space(&mut e, "wall", if pm { magnetic.clone() } else { dielectric.clone() });
            let exp_e = match (ret, pm) {
                (true, _) => -5,
                (false, false) => -4,
                (false, true) => -2,
            };
            out.push(PowerLawCase {
                id: String::new(),
                row: 'e',
                coupling,
                regime,
                force_exponent: exp_e,
                sign,
                scenario: e,
            });

            let mut f = Scenario::new(fit_run(Command::CasimirPressure, window(regime, lo, hi)));
            f.materials.insert("dielectric".into(), dielectric.clone());
            f.stacks.insert("left".into(), half_stack("dielectric"));
            if pm {
                f.materials.insert("magnetic".into(), magnetic.clone());
                f.stacks.insert("right".into(), half_stack("magnetic"));
            } else {
                f.stacks.insert("right".into(), half_stack("dielectric"));
            }
            f.geometry = Some(GeometrySpec {
                kind: "cavity".into(),
                left: Some("left".into()),
                right: Some("right".into()),
                ..Default::default()
            });
            let exp_f = match (ret, pm) {
                (true, _) => -4,
                (false, false) => -3,
                (false, true) => -1,
            };
            out.push(PowerLawCase {
                id: String::new(),
                row: 'f',
                coupling,
                regime,
                force_exponent: exp_f,
                sign,
                scenario: f,
            });
        }
    }
    out.sort_by_key(|c| (c.row, c.regime != "retarded", c.coupling != "pp"));
    for c in &mut out {
        c.id = format!("{}-{}-{}", c.row, c.coupling, c.regime);
    }
    out
}

/// Fit one case; the sign is read from the value at the window's far end.
pub fn fit_case(case: &PowerLawCase) -> Result<PowerLawRow, Failure> {
    let t = run_scenario(Command::PowerlawFit, &case.scenario)?;
    let fitted = t.rows[0].values[2];
    let run = &case.scenario.run;
    let target = run.target.expect("power-law cases set a target");
    let mut probe = case.scenario.clone();
    probe.run = Run {
        command: Some(target),
        points: 1,
        from: run.to,
        to: run.to,
        target: None,
        ..run.clone()
    };
    let value = run_scenario(target, &probe)?.rows[0].values[1];
    // casimir pressures count attraction as positive
    let attractive = if target == Command::CasimirPressure { value > 0.0 } else { value < 0.0 };
    Ok(PowerLawRow {
        id: case.id.clone(),
        expected: case.expected_slope(),
        fitted,
        sign_ok: attractive == (case.sign < 0),
        nonconverged: t.any_nonconverged(),
    })
}

pub fn table1() -> Result<String, Failure> {
    let cases = power_law_cases();
    let rows: Vec<PowerLawRow> = cases.iter().map(fit_case).collect::<Result<_, _>>()?;
    let mut out = format!("# # {TOOL}\n# # units: natural (hbar = c = eps0 = mu0 = 1)\n");
    out.push_str("# # each row is a powerlaw-fit run; its scenario follows\n");
    for c in &cases {
        let _ = writeln!(out, "# ## {}", c.id);
        for line in c.scenario.to_text().lines().filter(|l| !l.is_empty()) {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push_str("case,row,coupling,regime,force_exponent,sign,expected_slope,fitted_slope,deviation,flag\n");
    for (c, r) in cases.iter().zip(&rows) {
        let flag = match (r.nonconverged, r.sign_ok) {
            (false, true) => "ok",
            (true, true) => "nonconverged",
            (false, false) => "sign",
            (true, false) => "nonconverged|sign",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{flag}",
            c.id,
            c.row,
            c.coupling,
            c.regime,
            c.force_exponent,
            if c.sign > 0 { "+" } else { "-" },
            format_value(r.expected),
            format_value(r.fitted),
            format_value(r.deviation()),
        );
    }
    Ok(out)
}

/// The scenario behind each figure file, in `FILES` order.
pub fn figure_scenarios() -> Vec<(Command, Scenario)> {
    vec![
        (Command::Borderline, fig2()),
        (Command::CpPotential, fig3()),
        (Command::CpPotential, fig4()),
        (Command::CpPotential, fig5()),
        (Command::DynamicsResonant, excited(Command::DynamicsResonant)),
        (Command::DynamicsOffresonant, excited(Command::DynamicsOffresonant)),
    ]
}

/// All reference tables as (file name, contents).
pub fn reference_tables() -> Result<Vec<(&'static str, String)>, Failure> {
    let mut out = Vec::with_capacity(FILES.len());
    for ((command, scenario), name) in figure_scenarios().into_iter().zip(FILES) {
        out.push((name, render_csv(&run_scenario(command, &scenario)?)));
    }
    out.push((FILES[6], table1()?));
    Ok(out)
}

pub fn emit_reference_suite(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    reference_tables()?
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(path)
        })
        .collect()
}
