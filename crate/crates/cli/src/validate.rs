//! Scenario diagnostics without running anything.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{self, Problem, ProblemKind, Resolver};
use crate::run;
use crate::scenario::{Command, Location, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub at: Option<Location>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.at {
            Some(at) => write!(f, "{tag}: {at}: {}", self.message),
            None => write!(f, "{tag}: {}", self.message),
        }
    }
}

pub fn locate(src: &str, p: &Problem) -> Option<Location> {
    Location::find(src, &p.section, p.key.as_deref()).or_else(|| Location::find(src, &p.section, None))
}

fn from_problem(src: &str, p: &Problem) -> Diagnostic {
    let message = match p.kind {
        ProblemKind::Input => p.message.clone(),
        ProblemKind::Domain => format!("domain: {}", p.message),
    };
    Diagnostic {
        severity: Severity::Error,
        at: locate(src, p),
        message,
    }
}

fn warning(at: Option<Location>, message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Warning,
        at,
        message,
    }
}

/// Diagnostics for a scenario; empty when it is valid for `command` (or the
/// command named in `[run]`).
pub fn validate(src: &str, command: Option<Command>) -> Vec<Diagnostic> {
    let scenario = match Scenario::parse(src) {
        Ok(s) => s,
        Err(e) => {
            return vec![Diagnostic {
                severity: Severity::Error,
                at: Some(e.at),
                message: e.message.trim_end().to_string(),
            }]
        }
    };
    let mut out = Vec::new();
    let resolver = Resolver::new(&scenario);
    for (name, spec) in &scenario.materials {
        if let Err(p) = model::material(name, spec) {
            out.push(from_problem(src, &p));
        }
    }
    for (name, spec) in &scenario.stacks {
        if let Err(p) = resolver.build_stack(name, spec) {
            out.push(from_problem(src, &p));
        }
    }

    match command.or(scenario.run.command) {
        None => out.push(Diagnostic {
            severity: Severity::Error,
            at: Location::find(src, "run", None),
            message: "no command given in [run] or on the command line".into(),
        }),
        Some(c) => match run::check(c, &scenario) {
            Ok(notes) => {
                let at = Location::find(src, "run", Some("from"));
                out.extend(notes.into_iter().map(|n| warning(at, n)));
            }
            Err(p) => out.push(from_problem(src, &p)),
        },
    }

    if scenario.run.omega_ref.is_some() && !scenario.run.si_output {
        out.push(warning(
            Location::find(src, "run", Some("omega_ref")),
            "omega_ref is set but si_output is false; output stays in natural units".into(),
        ));
    }

    let mut used = BTreeSet::new();
    for stack in scenario.stacks.values() {
        used.extend(stack.layers.iter().cloned());
    }
    if let Some(g) = &scenario.geometry {
        used.extend(g.material.iter().chain(&g.interspace).cloned());
    }
    if let Some(t) = &scenario.transition {
        used.insert(t.material.clone());
    }
    for name in scenario.materials.keys().filter(|n| !used.contains(*n)) {
        out.push(warning(
            Location::find(src, &format!("materials.{name}"), None),
            format!("material `{name}` is never referenced"),
        ));
    }

    let mut seen = BTreeSet::new();
    out.retain(|d| seen.insert((d.at.map(|a| (a.line, a.column)), d.message.clone())));
    out.sort_by_key(|d| (d.severity, d.at.map(|a| (a.line, a.column))));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALID: &str = r#"
[run]
command = "cp-potential"
from = 0.1
to = 1.0
points = 3

[materials.glass]
model = "constant"
eps = 2.0

[stacks.wall]
layers = ["glass"]

[atom]
model = "two-level"
omega10 = 1.0
alpha0 = 1.0

[geometry]
kind = "half-space"
stack = "wall"
"#;

    #[test]
    fn valid_file_has_no_diagnostics() {
        assert_eq!(validate(VALID, None), vec![]);
    }

    #[test]
    fn unresolved_reference_is_located() {
        let src = VALID.replace("stack = \"wall\"", "stack = \"wal\"");
        let d = validate(&src, None);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].severity, Severity::Error);
        assert!(d[0].message.contains("unresolved stack reference `wal`"));
        assert_eq!(d[0].at, Some(Location { line: 22, column: 9 }));
    }

    #[test]
    fn ideal_marker_inside_multilayer_stack() {
        let src = VALID.replace(
            "layers = [\"glass\"]",
            "layers = [\"mirror\", \"glass\"]\nthicknesses = [0.5]\n\n[materials.mirror]\nmodel = \"perfect-conductor\"",
        );
        let d = validate(&src, None);
        assert!(d.iter().any(|d| d.message.contains("invalid stack")), "{d:?}");
    }

    #[test]
    fn thin_plate_at_thickness_equal_to_distance() {
        let src = VALID
            .replace("from = 0.1", "from = 0.5")
            .replace("points = 3", "points = 3\nasymptote = \"thin-plate\"")
            .replace(
                "kind = \"half-space\"\nstack = \"wall\"",
                "kind = \"plate\"\nmaterial = \"glass\"\nthickness = 0.5",
            );
        let d = validate(&src, None);
        assert!(
            d.iter().any(|d| d.severity == Severity::Warning && d.message.contains("thin-plate")),
            "{d:?}"
        );
        assert!(d.iter().all(|d| d.severity == Severity::Warning));
    }

    #[test]
    fn parse_error_becomes_single_diagnostic() {
        let d = validate("[run]\nfrom = \n", None);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].at.unwrap().line, 2);
    }

    #[test]
    fn missing_si_reference_is_reported() {
        let src = VALID.replace("points = 3", "points = 3\nsi_output = true");
        let d = validate(&src, None);
        assert!(d.iter().any(|d| d.message.contains("omega_ref")), "{d:?}");
    }
}
