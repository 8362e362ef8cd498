//! Scenario-driven front end for the `dispersion` core: parses scenario
//! files, runs parameter sweeps and writes CSV/JSON tables.

pub mod model;
pub mod output;
pub mod run;
pub mod scenario;
pub mod suite;
pub mod validate;

use std::fmt;

pub use run::{run, Table};
pub use scenario::{Command, Location, Scenario};

use model::ProblemKind;

/// Exit statuses of the command-line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 1;
    pub const NONCONVERGED: i32 = 2;
    pub const DOMAIN: i32 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Parse { at: Option<Location>, message: String },
    Domain(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Parse { .. } | Failure::Io(_) => exit::PARSE,
            Failure::Domain(_) => exit::DOMAIN,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse { at: Some(at), message } => write!(f, "parse error at {at}: {message}"),
            Failure::Parse { at: None, message } => write!(f, "parse error: {message}"),
            Failure::Domain(m) => write!(f, "domain error: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

fn from_run_error(src: Option<&str>, e: run::RunError) -> Failure {
    match e {
        run::RunError::Problem(p) => {
            let at = src.and_then(|s| validate::locate(s, &p));
            match p.kind {
                ProblemKind::Input => Failure::Parse { at, message: p.message },
                ProblemKind::Domain => Failure::Domain(match at {
                    Some(at) => format!("{at}: {}", p.message),
                    None => p.message,
                }),
            }
        }
        run::RunError::Domain(m) => Failure::Domain(m),
    }
}

/// Run a scenario already in memory (no source text for error locations).
pub fn run_scenario(command: Command, scenario: &Scenario) -> Result<Table, Failure> {
    run::run(command, scenario).map_err(|e| from_run_error(None, e))
}

/// Parse scenario text, apply the command-line overrides and run it.
pub fn execute(
    command: Command,
    src: &str,
    points: Option<usize>,
    tol: Option<f64>,
) -> Result<Table, Failure> {
    let mut scenario = Scenario::parse(src).map_err(|e| Failure::Parse {
        at: Some(e.at),
        message: e.message.trim_end().to_string(),
    })?;
    if let Some(n) = points {
        scenario.run.points = n;
    }
    if let Some(t) = tol {
        scenario.run.tol = t;
    }
    run::run(command, &scenario).map_err(|e| from_run_error(Some(src), e))
}
