use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dispersion_cli::output::{render_csv, render_json};
use dispersion_cli::validate::{validate, Severity};
use dispersion_cli::{execute, exit, suite, Command, Failure};

#[derive(Parser)]
#[command(name = "dispersion", version, about = "Casimir, Casimir-Polder and van der Waals calculations from scenario files")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Write the table here instead of standard output (.json selects JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the number of sweep points.
    #[arg(long)]
    points: Option<usize>,
    /// Override the relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Action {
    /// Pressure between two planar walls across a gap sweep.
    CasimirPressure(RunArgs),
    /// Atom-surface potential over atom positions.
    CpPotential(RunArgs),
    /// Atom-surface force over atom positions.
    CpForce(RunArgs),
    /// Two-atom potential over separations.
    VdwPair(RunArgs),
    /// N-atom potential for a uniformly scaled cluster.
    VdwNbody(RunArgs),
    /// Permeability at which retarded attraction turns into repulsion.
    Borderline(RunArgs),
    /// Resonant force on an excited atom, self-consistent and perturbative.
    DynamicsResonant(RunArgs),
    /// Off-resonant force on an excited atom.
    DynamicsOffresonant(RunArgs),
    /// Time evolution of the excited-state population and force.
    DynamicsEvolve(RunArgs),
    /// Log-log slope of a potential or pressure over the sweep range.
    PowerlawFit(RunArgs),
    /// Report problems in a scenario file without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        /// Check against this command instead of the one in [run].
        #[arg(long, value_enum)]
        command: Option<Command>,
    },
    /// Regenerate the reference tables into a directory.
    ReferenceSuite {
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn run(command: Command, args: &RunArgs) -> Result<i32, Failure> {
    let src = read(&args.scenario)?;
    let table = execute(command, &src, args.points, args.tol)?;
    let json = args.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let body = if json { render_json(&table) } else { render_csv(&table) };
    match &args.out {
        Some(p) => fs::write(p, body).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => print!("{body}"),
    }
    Ok(if table.any_nonconverged() { exit::NONCONVERGED } else { exit::OK })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.action {
        Action::Validate { scenario, command } => read(scenario).map(|src| {
            let diags = validate(&src, *command);
            for d in &diags {
                println!("{d}");
            }
            if diags.iter().any(|d| d.severity == Severity::Error) {
                exit::PARSE
            } else {
                exit::OK
            }
        }),
        Action::ReferenceSuite { out } => suite::emit_reference_suite(out).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
            exit::OK
        }),
        Action::CasimirPressure(a) => run(Command::CasimirPressure, a),
        Action::CpPotential(a) => run(Command::CpPotential, a),
        Action::CpForce(a) => run(Command::CpForce, a),
        Action::VdwPair(a) => run(Command::VdwPair, a),
        Action::VdwNbody(a) => run(Command::VdwNbody, a),
        Action::Borderline(a) => run(Command::Borderline, a),
        Action::DynamicsResonant(a) => run(Command::DynamicsResonant, a),
        Action::DynamicsOffresonant(a) => run(Command::DynamicsOffresonant, a),
        Action::DynamicsEvolve(a) => run(Command::DynamicsEvolve, a),
        Action::PowerlawFit(a) => run(Command::PowerlawFit, a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
