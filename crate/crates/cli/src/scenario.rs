//! Scenario files.
//!
//! A scenario is a line-oriented `key = value` document under bracketed
//! section headers. Named definitions use one level of nesting:
//!
//! ```text
//! [run]
//! command = "cp-potential"
//! from = 0.01
//! to = 10.0
//! points = 200
//!
//! [materials.wall]
//! model = "drude-lorentz"
//! eps_plasma = 0.75
//! eps_resonance = 1.03
//! eps_damping = 0.001
//!
//! [stacks.half]
//! layers = ["wall"]
//!
//! [atom]
//! model = "two-level"
//! omega10 = 1.0
//! alpha0 = 1.0
//!
//! [geometry]
//! kind = "half-space"
//! stack = "half"
//! ```
//!
//! The format is parsed as TOML, so the usual comment and quoting rules apply.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CasimirPressure,
    CpPotential,
    CpForce,
    VdwPair,
    VdwNbody,
    Borderline,
    DynamicsResonant,
    DynamicsOffresonant,
    DynamicsEvolve,
    PowerlawFit,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::CasimirPressure,
        Command::CpPotential,
        Command::CpForce,
        Command::VdwPair,
        Command::VdwNbody,
        Command::Borderline,
        Command::DynamicsResonant,
        Command::DynamicsOffresonant,
        Command::DynamicsEvolve,
        Command::PowerlawFit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::CasimirPressure => "casimir-pressure",
            Command::CpPotential => "cp-potential",
            Command::CpForce => "cp-force",
            Command::VdwPair => "vdw-pair",
            Command::VdwNbody => "vdw-nbody",
            Command::Borderline => "borderline",
            Command::DynamicsResonant => "dynamics-resonant",
            Command::DynamicsOffresonant => "dynamics-offresonant",
            Command::DynamicsEvolve => "dynamics-evolve",
            Command::PowerlawFit => "powerlaw-fit",
        }
    }

    /// Variables the command can sweep; the first is the default.
    pub fn sweep_variables(self) -> &'static [&'static str] {
        match self {
            Command::CasimirPressure => &["d"],
            Command::CpPotential | Command::CpForce => &["z"],
            Command::VdwPair => &["r"],
            Command::VdwNbody => &["scale"],
            Command::Borderline => &["eps"],
            Command::DynamicsResonant | Command::DynamicsOffresonant => &["omega10", "z"],
            Command::DynamicsEvolve => &["t"],
            Command::PowerlawFit => &[],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroFrequencyRule {
    #[default]
    Drude,
    Plasma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Asymptote {
    Retarded,
    Nonretarded,
    ThinPlate,
}

fn default_points() -> usize {
    50
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
    pub from: f64,
    pub to: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// k_B T in units of ħω_ref; zero selects the frequency integral.
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub zero_frequency: ZeroFrequencyRule,
    /// Reference frequency in rad/s, used only for SI output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ref: Option<f64>,
    #[serde(default)]
    pub si_output: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptote: Option<Asymptote>,
    /// Quantity fitted by `powerlaw-fit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Command>,
    /// Dotted path of a scenario value to vary, one output column group per entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series_values: Vec<toml::Value>,
}

impl Run {
    pub fn new(command: Command, from: f64, to: f64, points: usize) -> Self {
        Self {
            command: Some(command),
            sweep: None,
            from,
            to,
            points,
            spacing: Spacing::Log,
            temperature: 0.0,
            tol: default_tol(),
            zero_frequency: ZeroFrequencyRule::Drude,
            omega_ref: None,
            si_output: false,
            asymptote: None,
            target: None,
            series: None,
            series_values: Vec::new(),
        }
    }

    /// The sweep grid, in increasing order.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.from];
        }
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                if k == n - 1 {
                    self.to
                } else {
                    match self.spacing {
                        Spacing::Linear => self.from + t * (self.to - self.from),
                        Spacing::Log => self.from * (self.to / self.from).powf(t),
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    /// vacuum, constant, drude-lorentz, perfect-conductor or perfectly-permeable.
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_plasma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_static: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_resonance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_plasma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_static: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_resonance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_damping: Option<f64>,
}

/// Layers listed from the gap outwards; the last one is semi-infinite.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    pub layers: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thicknesses: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    /// static, two-level or multi-oscillator.
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega10: Option<f64>,
    /// |d₁₀|², an alternative to alpha0 for a two-level atom.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frequencies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strengths: Vec<f64>,
    /// electric (default) or magnetic; used for the `vdw-pair` partner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    /// half-space, plate, cavity or ideal-mirror.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Material filling the gap of a cavity (vacuum if absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interspace: Option<String>,
    /// conductor or permeable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror: Option<String>,
    /// Atom position when z is not swept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    /// Atom positions at scale 1.
    pub positions: Vec<[f64; 3]>,
}

/// Excited two-level atom near a half space.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega10: Option<f64>,
    /// |d₀₁|² + (d₀₁·e_z)².
    pub dipole_weight: f64,
    pub material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub omega_nu: f64,
    pub gamma_nu: f64,
    pub rabi: f64,
    #[serde(default)]
    pub residual_width: f64,
    #[serde(default)]
    pub residual_shift: f64,
    pub transition_frequency: f64,
    /// Force F₁ on the atom in its upper state.
    #[serde(default = "one")]
    pub force: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub run: Run,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub materials: BTreeMap<String, MaterialSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stacks: BTreeMap<String, StackSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<AtomSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<AtomSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<ClusterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<TransitionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeSpec>,
}

impl Scenario {
    pub fn new(run: Run) -> Self {
        Self {
            run,
            materials: BTreeMap::new(),
            stacks: BTreeMap::new(),
            atom: None,
            partner: None,
            geometry: None,
            cluster: None,
            transition: None,
            mode: None,
        }
    }

    pub fn parse(src: &str) -> Result<Self, ParseError> {
        toml::from_str(src).map_err(|e| {
            let at = e
                .span()
                .map(|s| Location::at_offset(src, s.start))
                .unwrap_or(Location { line: 1, column: 1 });
            ParseError {
                at,
                message: e.message().to_string(),
            }
        })
    }

    /// Canonical text form; parsing it gives back an equal scenario.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("scenario values are always representable")
    }

    /// Recover the scenario from the metadata block of an output table.
    pub fn from_metadata(table: &str) -> Result<Self, ParseError> {
        let src: String = table
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| format!("{}\n", l.strip_prefix("# ").unwrap_or("")))
            .collect();
        Self::parse(&src)
    }

    /// A copy with the value at a dotted path (e.g. `materials.wall.mu_static`) replaced.
    pub fn with_value(&self, path: &str, value: &toml::Value) -> Result<Self, String> {
        let mut tree = toml::Value::try_from(self).map_err(|e| e.to_string())?;
        let mut node = &mut tree;
        let keys: Vec<&str> = path.split('.').collect();
        for (i, key) in keys.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| format!("`{}` is not a section", keys[..i].join(".")))?;
            if i + 1 == keys.len() {
                table.insert(key.to_string(), value.clone());
                break;
            }
            node = table
                .get_mut(*key)
                .ok_or_else(|| format!("`{}` does not exist", keys[..=i].join(".")))?;
        }
        tree.try_into().map_err(|e: toml::de::Error| e.message().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn at_offset(src: &str, offset: usize) -> Self {
        let before = &src[..offset.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Location { line, column }
    }

    /// Position of `key` within `[section]`, or of the header itself.
    pub fn find(src: &str, section: &str, key: Option<&str>) -> Option<Self> {
        let mut current = String::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim_start();
            let indent = raw.len() - line.len();
            if let Some(rest) = line.strip_prefix('[') {
                current = rest.split(']').next().unwrap_or("").trim().to_string();
                if current == section && key.is_none() {
                    return Some(Location { line: i + 1, column: indent + 1 });
                }
                continue;
            }
            if current != section {
                continue;
            }
            if let Some(k) = key {
                if let Some((lhs, _)) = line.split_once('=') {
                    if lhs.trim().trim_matches('"') == k {
                        let value_col = raw.find('=').map_or(indent, |p| {
                            p + 1 + (raw[p + 1..].len() - raw[p + 1..].trim_start().len())
                        });
                        return Some(Location { line: i + 1, column: value_col + 1 });
                    }
                }
            }
        }
        None
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub at: Location,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.at, self.message.trim_end())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[run]
command = "cp-potential"
from = 0.01
to = 10
points = 4

[materials.wall]
model = "drude-lorentz"
eps_plasma = 0.75
eps_resonance = 1.03
eps_damping = 0.001
mu_static = 5
mu_resonance = 1
mu_damping = 0.001

[stacks.half]
layers = ["wall"]

[atom]
model = "two-level"
omega10 = 1
alpha0 = 1

[geometry]
kind = "half-space"
stack = "half"
"#;

    #[test]
    fn parses_and_round_trips() {
        let s = Scenario::parse(SAMPLE).unwrap();
        assert_eq!(s.run.command, Some(Command::CpPotential));
        assert_eq!(s.materials["wall"].mu_static, Some(5.0));
        let again = Scenario::parse(&s.to_text()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn metadata_comment_block_round_trips() {
        let s = Scenario::parse(SAMPLE).unwrap();
        let header: String = s.to_text().lines().map(|l| format!("# {l}\n")).collect();
        let table = format!("# # tool line\n{header}z,potential,flag\n1,2,ok\n");
        assert_eq!(Scenario::from_metadata(&table).unwrap(), s);
    }

    #[test]
    fn parse_errors_carry_line_and_column() {
        let bad = SAMPLE.replace("to = 10", "to = ten");
        let e = Scenario::parse(&bad).unwrap_err();
        assert_eq!(e.at.line, 5);
        assert_eq!(e.at.column, 6);
        let unknown = SAMPLE.replace("points = 4", "pionts = 4");
        let e = Scenario::parse(&unknown).unwrap_err();
        assert_eq!(e.at.line, 6);
    }

    #[test]
    fn finds_keys_in_sections() {
        let at = Location::find(SAMPLE, "geometry", Some("stack")).unwrap();
        assert_eq!(at, Location { line: 27, column: 9 });
        let at = Location::find(SAMPLE, "materials.wall", None).unwrap();
        assert_eq!(at.line, 8);
    }

    #[test]
    fn grids_hit_both_ends() {
        let mut run = Run::new(Command::CpPotential, 0.1, 10.0, 3);
        assert_eq!(run.grid(), vec![0.1, 0.1 * 100f64.sqrt(), 10.0]);
        run.spacing = Spacing::Linear;
        assert_eq!(run.grid(), vec![0.1, 5.05, 10.0]);
    }

    #[test]
    fn series_override_by_path() {
        let s = Scenario::parse(SAMPLE).unwrap();
        let t = s.with_value("materials.wall.mu_static", &toml::Value::Float(2.0)).unwrap();
        assert_eq!(t.materials["wall"].mu_static, Some(2.0));
        assert!(s.with_value("materials.nope.mu", &toml::Value::Float(2.0)).is_err());
    }
}
