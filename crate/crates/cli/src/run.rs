//! Command dispatch and parameter sweeps.

use std::cell::Cell;

use dispersion::cp::{self, nonretarded_asymptotes, thin_plate_asymptotes, ResponseKind};
use dispersion::dynamics::{
    dress, evolve_strong, evolve_weak, offresonant_force_at, offresonant_force_perturbative,
    resonant_force_at, resonant_force_perturbative, Dressed,
};
use dispersion::vdw::{pm_nonretarded, pm_retarded, pp_nonretarded, pp_retarded};
use dispersion::{
    casimir_pressure, cp_force, cp_potential, n_atom_potential, pm_potential, power_law_fit,
    pp_potential, AtomPair, AtomScenario, Error, Geometry, MaterialModel, PlanarScenario,
    Polarizability, QuadSpec, QuasiMode, Regime, TemperatureSpec, TwoLevelNearHalfSpace,
};
use nalgebra::Vector3;
use rayon::prelude::*;

use crate::model::{Problem, Resolver};
use crate::scenario::{Asymptote, Command, Scenario};

/// Physical dimension of a column, for optional SI conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    None,
    Length,
    Time,
    Frequency,
    Energy,
    Force,
    Pressure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub dim: Dim,
}

fn col(name: &str, dim: Dim) -> Column {
    Column {
        name: name.into(),
        dim,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub nonconverged: bool,
    pub regime: bool,
}

impl Flags {
    fn merge(&mut self, other: Flags) {
        self.nonconverged |= other.nonconverged;
        self.regime |= other.regime;
    }

    pub fn label(&self) -> &'static str {
        match (self.nonconverged, self.regime) {
            (false, false) => "ok",
            (true, false) => "nonconverged",
            (false, true) => "regime",
            (true, true) => "nonconverged|regime",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<f64>,
    pub flags: Flags,
}

/// A computed sweep: the resolved scenario, columns (sweep variable first) and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub scenario: Scenario,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn any_nonconverged(&self) -> bool {
        self.rows.iter().any(|r| r.flags.nonconverged)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Problem(Problem),
    /// A physics-domain failure at one sweep point.
    Domain(String),
}

impl From<Problem> for RunError {
    fn from(p: Problem) -> Self {
        RunError::Problem(p)
    }
}

/// Absorb a non-convergence into the flags, keeping the best estimate.
fn soft(r: dispersion::Result<f64>, flags: &mut Flags) -> dispersion::Result<f64> {
    match r {
        Err(Error::Convergence { value, .. }) => {
            flags.nonconverged = true;
            Ok(value)
        }
        r => r,
    }
}

fn extremal(freqs: &[f64]) -> (f64, f64) {
    let lo = freqs.iter().copied().filter(|f| *f > 0.0).fold(f64::INFINITY, f64::min);
    let hi = freqs.iter().copied().fold(0.0, f64::max);
    (lo, hi)
}

/// Whether `x` lies inside the validity window of an asymptote.
fn in_window(asymptote: Asymptote, x: f64, (lo, hi): (f64, f64)) -> bool {
    match asymptote {
        Asymptote::Retarded => !lo.is_finite() || x * lo > 10.0,
        Asymptote::Nonretarded => x * hi < 0.1,
        Asymptote::ThinPlate => true,
    }
}

fn atom_frequencies(atom: &Polarizability, geometry: &Geometry) -> Vec<f64> {
    let mut f = atom.characteristic_frequencies();
    match geometry {
        Geometry::HalfSpace(s) => f.extend(s.characteristic_frequencies()),
        Geometry::Plate { material, .. } => f.extend(material.characteristic_frequencies()),
        Geometry::Cavity { left, right, .. } => {
            f.extend(left.characteristic_frequencies());
            f.extend(right.characteristic_frequencies());
        }
        Geometry::IdealMirror(_) => {}
    }
    f
}

fn single_material(geometry: &Geometry) -> Option<MaterialModel> {
    match geometry {
        Geometry::HalfSpace(s) if s.layers().len() == 1 => Some(s.layers()[0].material),
        Geometry::Plate { material, .. } => Some(*material),
        _ => None,
    }
}

#[derive(Debug, Clone)]
enum Job {
    Casimir {
        scn: PlanarScenario,
        temp: TemperatureSpec,
    },
    Cp {
        scn: AtomScenario,
        force: bool,
        asymptote: Option<Asymptote>,
        window: (f64, f64),
    },
    Pair {
        pair: AtomPair,
        magnetic: bool,
        asymptote: Option<Asymptote>,
        window: (f64, f64),
    },
    Cluster {
        positions: Vec<Vector3<f64>>,
        atoms: Vec<Polarizability>,
    },
    Borderline,
    Resonant {
        sys: TwoLevelNearHalfSpace,
        sweep_z: bool,
    },
    Offresonant {
        sys: TwoLevelNearHalfSpace,
        sweep_z: bool,
    },
    Evolve {
        mode: QuasiMode,
        f1: f64,
    },
}

impl Job {
    fn build(command: Command, sweep: &str, r: &Resolver) -> Result<Job, Problem> {
        let asymptote = r.scenario.run.asymptote;
        if asymptote.is_some() && !matches!(command, Command::CpPotential | Command::VdwPair) {
            return Err(Problem::input("run", Some("asymptote"), format!("`{command}` has no asymptote column")));
        }
        Ok(match command {
            Command::CasimirPressure => Job::Casimir {
                scn: r.cavity()?,
                temp: r.temperature()?,
            },
            Command::CpPotential | Command::CpForce => {
                let scn = r.atom_scenario(true)?;
                let window = extremal(&atom_frequencies(&scn.atom, &scn.geometry));
                match (asymptote, &scn.geometry) {
                    (Some(Asymptote::ThinPlate), Geometry::Plate { .. }) => {}
                    (Some(Asymptote::ThinPlate), _) => {
                        return Err(Problem::input("run", Some("asymptote"), "thin-plate asymptotes need a plate geometry"))
                    }
                    (Some(_), g) if single_material(g).is_none() || matches!(g, Geometry::Plate { .. }) => {
                        return Err(Problem::input("run", Some("asymptote"), "retarded and nonretarded asymptotes need a single-material half space"))
                    }
                    _ => {}
                }
                Job::Cp {
                    scn,
                    force: command == Command::CpForce,
                    asymptote,
                    window,
                }
            }
            Command::VdwPair => {
                let (pair, magnetic) = r.pair()?;
                if asymptote == Some(Asymptote::ThinPlate) {
                    return Err(Problem::input("run", Some("asymptote"), "thin-plate asymptotes need a plate geometry"));
                }
                let mut f = pair.a.characteristic_frequencies();
                f.extend(pair.b.characteristic_frequencies());
                Job::Pair {
                    pair,
                    magnetic,
                    asymptote,
                    window: extremal(&f),
                }
            }
            Command::VdwNbody => {
                let (positions, atoms) = r.cluster()?;
                Job::Cluster { positions, atoms }
            }
            Command::Borderline => Job::Borderline,
            Command::DynamicsResonant => Job::Resonant {
                sys: r.transition(sweep)?,
                sweep_z: sweep == "z",
            },
            Command::DynamicsOffresonant => Job::Offresonant {
                sys: r.transition(sweep)?,
                sweep_z: sweep == "z",
            },
            Command::DynamicsEvolve => {
                let (mode, f1) = r.mode()?;
                Job::Evolve { mode, f1 }
            }
            Command::PowerlawFit => unreachable!("fits are dispatched separately"),
        })
    }

    fn columns(&self) -> Vec<Column> {
        match self {
            Job::Casimir { .. } => vec![col("pressure", Dim::Pressure), col("error_estimate", Dim::Pressure)],
            Job::Cp { force: true, .. } => vec![col("force", Dim::Force)],
            Job::Cp { asymptote, .. } => {
                let mut c = vec![col("potential", Dim::Energy)];
                match asymptote {
                    Some(Asymptote::ThinPlate) => {
                        c.push(col("thin_plate_retarded", Dim::Energy));
                        c.push(col("thin_plate_nonretarded", Dim::Energy));
                    }
                    Some(_) => c.push(col("asymptote", Dim::Energy)),
                    None => {}
                }
                c
            }
            Job::Pair { asymptote, .. } => {
                let mut c = vec![col("potential", Dim::Energy)];
                if asymptote.is_some() {
                    c.push(col("asymptote", Dim::Energy));
                }
                c
            }
            Job::Cluster { .. } => vec![col("potential", Dim::Energy)],
            Job::Borderline => vec![
                col("mu_borderline", Dim::None),
                col("weak_slope", Dim::None),
                col("strong_ratio", Dim::None),
            ],
            Job::Resonant { .. } => vec![
                col("force", Dim::Force),
                col("perturbative", Dim::Force),
                col("shift_only", Dim::Force),
                col("broadening_only", Dim::Force),
                col("shift", Dim::Frequency),
                col("width", Dim::Frequency),
            ],
            Job::Offresonant { .. } => vec![
                col("force", Dim::Force),
                col("perturbative", Dim::Force),
                col("broadening_effect", Dim::Force),
                col("broadening_effect_unshifted", Dim::Force),
            ],
            Job::Evolve { .. } => vec![
                col("population", Dim::None),
                col("force_scale", Dim::None),
                col("force", Dim::Force),
            ],
        }
    }

    fn sweep_dim(&self) -> Dim {
        match self {
            Job::Casimir { .. } | Job::Cp { .. } | Job::Pair { .. } => Dim::Length,
            Job::Resonant { sweep_z: true, .. } | Job::Offresonant { sweep_z: true, .. } => Dim::Length,
            Job::Resonant { .. } | Job::Offresonant { .. } => Dim::Frequency,
            Job::Evolve { .. } => Dim::Time,
            Job::Cluster { .. } | Job::Borderline => Dim::None,
        }
    }

    /// The primary value at `x`, for power-law fits.
    fn primary(&self, x: f64, spec: &QuadSpec, flags: &mut Flags) -> dispersion::Result<f64> {
        let (v, f) = self.eval(x, spec)?;
        flags.merge(f);
        Ok(v[0])
    }

    fn eval(&self, x: f64, spec: &QuadSpec) -> dispersion::Result<(Vec<f64>, Flags)> {
        let mut flags = Flags::default();
        let values = match self {
            Job::Casimir { scn, temp } => match casimir_pressure(&scn.with_width(x), *temp, spec) {
                Ok(p) => vec![p.value, p.error],
                Err(Error::Convergence { value, error, .. }) => {
                    flags.nonconverged = true;
                    vec![value, error]
                }
                Err(e) => return Err(e),
            },
            Job::Cp {
                scn,
                force,
                asymptote,
                window,
            } => {
                let s = scn.with_z(x);
                s.validate()?;
                if *force {
                    vec![soft(cp_force(&s, spec), &mut flags)?]
                } else {
                    let mut v = vec![soft(cp_potential(&s, spec), &mut flags)?];
                    if let Some(a) = asymptote {
                        flags.regime |= !in_window(*a, x, *window);
                        v.extend(cp_asymptote(&s, *a, spec, &mut flags)?);
                    }
                    v
                }
            }
            Job::Pair {
                pair,
                magnetic,
                asymptote,
                window,
            } => {
                let p = pair.with_r(x);
                let full = if *magnetic { pm_potential(&p, spec) } else { pp_potential(&p, spec) };
                let mut v = vec![soft(full, &mut flags)?];
                if let Some(a) = asymptote {
                    flags.regime |= !in_window(*a, x, *window);
                    let (aa, bb) = (p.a.static_value(), p.b.static_value());
                    v.push(match (a, magnetic) {
                        (Asymptote::Retarded, false) => pp_retarded(aa, bb, x),
                        (Asymptote::Retarded, true) => pm_retarded(aa, bb, x),
                        (_, false) => soft(pp_nonretarded(&p, spec), &mut flags)?,
                        (_, true) => soft(pm_nonretarded(&p, spec), &mut flags)?,
                    });
                }
                v
            }
            Job::Cluster { positions, atoms } => {
                let scaled: Vec<_> = positions.iter().map(|p| p * x).collect();
                vec![soft(n_atom_potential(&scaled, atoms, spec), &mut flags)?]
            }
            Job::Borderline => {
                let mu = cp::borderline_mu(x)?;
                vec![mu, (mu - 1.0) / (x - 1.0), mu / x]
            }
            Job::Resonant { sys, sweep_z } => {
                let s = if *sweep_z { TwoLevelNearHalfSpace { z: x, ..*sys } } else { sys.with_omega10(x) };
                flags.regime = !s.nonretarded_valid();
                match dress(&s) {
                    Ok(d) => vec![
                        resonant_force_at(&s, d)?,
                        resonant_force_perturbative(&s)?,
                        resonant_force_at(&s, Dressed { width: 0.0, ..d })?,
                        resonant_force_at(&s, Dressed { shift: 0.0, ..d })?,
                        d.shift,
                        d.width,
                    ],
                    Err(Error::Iteration { .. }) => {
                        flags.nonconverged = true;
                        let mut v = vec![f64::NAN; 6];
                        v[1] = resonant_force_perturbative(&s)?;
                        v
                    }
                    Err(e) => return Err(e),
                }
            }
            Job::Offresonant { sys, sweep_z } => {
                let s = if *sweep_z { TwoLevelNearHalfSpace { z: x, ..*sys } } else { sys.with_omega10(x) };
                flags.regime = !s.nonretarded_valid();
                let perturbative = soft(offresonant_force_perturbative(&s, spec), &mut flags)?;
                match dress(&s) {
                    Ok(d) => {
                        let mut at = |d: Dressed| soft(offresonant_force_at(&s, d, spec), &mut flags);
                        let full = at(d)?;
                        let narrow = at(Dressed { width: 0.0, ..d })?;
                        let unshifted = at(Dressed { shift: 0.0, ..d })?;
                        let bare = at(Dressed { shift: 0.0, width: 0.0 })?;
                        vec![full, perturbative, full - narrow, unshifted - bare]
                    }
                    Err(Error::Iteration { .. }) => {
                        flags.nonconverged = true;
                        vec![f64::NAN, perturbative, f64::NAN, f64::NAN]
                    }
                    Err(e) => return Err(e),
                }
            }
            Job::Evolve { mode, f1 } => {
                let r = match mode.regime() {
                    Regime::Weak => {
                        let gamma = mode.residual_width - 2.0 * mode.roots().plus.re;
                        evolve_weak(*f1, gamma, &[x])?
                    }
                    _ => evolve_strong(mode, *f1, &[x])?,
                };
                flags.regime = r.regime_warning;
                vec![r.population[0], r.force_scale[0], r.force[0]]
            }
        };
        Ok((values, flags))
    }
}

impl Job {
    /// Why an asymptote or approximation is outside its window at `x`, if it is.
    fn regime_note(&self, x: f64) -> Option<String> {
        match self {
            Job::Cp { scn, asymptote: Some(Asymptote::ThinPlate), .. } => {
                let Geometry::Plate { material, thickness } = scn.geometry else {
                    return None;
                };
                let n0 = (material.epsilon_ixi(0.0).ok()? * material.mu_ixi(0.0).ok()?).sqrt();
                (!(n0 * thickness < 0.1 * x)).then(|| {
                    format!("thin-plate asymptote outside its window at z = {x}: n(0)d = {} is not below 0.1 z", n0 * thickness)
                })
            }
            Job::Cp { asymptote: Some(a), window, .. } | Job::Pair { asymptote: Some(a), window, .. } => {
                (!in_window(*a, x, *window)).then(|| format!("{a:?} asymptote outside its window at {x}").to_lowercase())
            }
            Job::Resonant { sys, sweep_z } | Job::Offresonant { sys, sweep_z } => {
                let s = if *sweep_z { TwoLevelNearHalfSpace { z: x, ..*sys } } else { sys.with_omega10(x) };
                (!s.nonretarded_valid()).then(|| format!("nonretarded treatment outside its window at {x} (z times the largest frequency is not below 0.1)"))
            }
            Job::Evolve { mode, .. } => (mode.regime() == Regime::Intermediate)
                .then(|| "mode parameters are between the weak and strong coupling regimes; the strong-coupling solution is used".into()),
            _ => None,
        }
    }
}

/// Resolve a scenario for `command` without computing anything, returning
/// regime notes for the sweep endpoints.
pub fn check(command: Command, scenario: &Scenario) -> Result<Vec<String>, Problem> {
    let resolver = Resolver::new(scenario);
    let sweep = resolver.run_checks(command)?;
    let target = match command {
        Command::PowerlawFit => scenario.run.target.expect("checked by run_checks"),
        c => c,
    };
    let job = Job::build(target, &sweep, &resolver)?;
    let mut notes: Vec<String> = [scenario.run.from, scenario.run.to]
        .into_iter()
        .filter_map(|x| job.regime_note(x))
        .collect();
    notes.dedup();
    Ok(notes)
}

fn cp_asymptote(
    s: &AtomScenario,
    a: Asymptote,
    spec: &QuadSpec,
    flags: &mut Flags,
) -> dispersion::Result<Vec<f64>> {
    let m = single_material(&s.geometry).expect("checked when the job was built");
    Ok(match a {
        Asymptote::Retarded => vec![cp::cp_retarded_halfspace_asymptote(
            s.atom.static_value(),
            m.epsilon_ixi(0.0)?,
            m.mu_ixi(0.0)?,
            s.z,
        )?],
        Asymptote::Nonretarded => {
            let kind = if m.mu_ixi(1.0)? == 1.0 {
                ResponseKind::Dielectric
            } else {
                ResponseKind::Magnetic
            };
            vec![soft(nonretarded_asymptotes(&s.atom, &m, s.z, kind, spec), flags)?]
        }
        Asymptote::ThinPlate => {
            let Geometry::Plate { thickness, .. } = s.geometry else {
                unreachable!("checked when the job was built")
            };
            let t = thin_plate_asymptotes(&s.atom, &m, s.z, thickness, spec)?;
            flags.regime |= t.regime_warning;
            flags.nonconverged |= !t.converged;
            vec![
                t.retarded.unwrap_or(f64::NAN),
                t.nonretarded_dielectric + t.nonretarded_magnetic,
            ]
        }
    })
}

fn sweep_name(command: Command, sweep: &str) -> String {
    match command {
        Command::PowerlawFit => "from".into(),
        _ => sweep.into(),
    }
}

/// Run `command` on a scenario. The returned table carries the scenario with
/// all defaults filled in.
pub fn run(command: Command, scenario: &Scenario) -> Result<Table, RunError> {
    let resolver = Resolver::new(scenario);
    let sweep = resolver.run_checks(command)?;
    let mut resolved = scenario.clone();
    resolved.run.command = Some(command);
    resolved.run.sweep = Some(sweep.clone());

    let variants: Vec<(String, Scenario)> = match &scenario.run.series {
        None => vec![(String::new(), resolved.clone())],
        Some(path) => scenario
            .run
            .series_values
            .iter()
            .map(|v| {
                let mut s = resolved
                    .with_value(path, v)
                    .map_err(|e| Problem::input("run", Some("series"), e))?;
                s.run.series = None;
                s.run.series_values.clear();
                let shown: String = v
                    .to_string()
                    .chars()
                    .filter(|c| !matches!(c, '"' | '[' | ']' | ' '))
                    .map(|c| if c == ',' { ';' } else { c })
                    .collect();
                Ok((format!("@{}={shown}", path.rsplit('.').next().unwrap_or(path)), s))
            })
            .collect::<Result<_, Problem>>()?,
    };

    let spec = QuadSpec::new(scenario.run.tol);
    let job_command = if command == Command::PowerlawFit {
        scenario.run.target.expect("checked by run_checks")
    } else {
        command
    };
    let jobs: Vec<(String, Job)> = variants
        .iter()
        .map(|(label, s)| Ok((label.clone(), Job::build(job_command, &sweep, &Resolver::new(s))?)))
        .collect::<Result<_, Problem>>()?;

    let mut columns = vec![col(&sweep_name(command, &sweep), jobs[0].1.sweep_dim())];
    let rows = if command == Command::PowerlawFit {
        columns.push(col("to", jobs[0].1.sweep_dim()));
        for (label, _) in &jobs {
            columns.push(col(&format!("slope{label}"), Dim::None));
        }
        let mut flags = Flags::default();
        let mut values = vec![scenario.run.from, scenario.run.to];
        for (_, job) in &jobs {
            let f = Cell::new(Flags::default());
            let slope = power_law_fit(
                |x| {
                    let mut fl = f.get();
                    let v = job.primary(x, &spec, &mut fl);
                    f.set(fl);
                    v
                },
                (scenario.run.from, scenario.run.to),
                scenario.run.points,
            )
            .map_err(|e| RunError::Domain(e.to_string()))?;
            flags.merge(f.get());
            values.push(slope);
        }
        vec![Row { values, flags }]
    } else {
        for (label, job) in &jobs {
            for c in job.columns() {
                columns.push(Column {
                    name: format!("{}{label}", c.name),
                    dim: c.dim,
                });
            }
        }
        let grid = scenario.run.grid();
        let cells: Vec<dispersion::Result<(Vec<f64>, Flags)>> = grid
            .par_iter()
            .flat_map_iter(|&x| jobs.iter().map(move |(_, j)| (x, j)))
            .map(|(x, j)| j.eval(x, &spec))
            .collect();
        let per_row = jobs.len();
        let mut rows = Vec::with_capacity(grid.len());
        for (x, chunk) in grid.iter().zip(cells.chunks(per_row)) {
            let mut values = vec![*x];
            let mut flags = Flags::default();
            for cell in chunk {
                let (v, f) = cell
                    .clone()
                    .map_err(|e| RunError::Domain(format!("at {sweep} = {x}: {e}")))?;
                values.extend(v);
                flags.merge(f);
            }
            rows.push(Row { values, flags });
        }
        rows
    };

    Ok(Table {
        scenario: resolved,
        columns,
        rows,
    })
}
