//! hexaspec: spectral computations for fourth-order beam Hamiltonians on
//! hexagonal lattices.
//!
//! Exit codes: 0 success, 1 validation or numerical failure, 2 usage error.

mod commands;
mod config;
mod dataset;

use clap::{Args, Parser, Subcommand};
use commands::{run_command, CommandKind};
use config::{OutputFormat, RunConfig};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hexaspec",
    version,
    about = "Band structure, dispersion, Dirac points and Fermi surfaces of periodic hexagonal beam lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (.toml or .json); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; defaults to the config's output.path or "<command>.<ext>".
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides the config.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral bands with multiplicities and edge labels, plus flat bands.
    Bands(CommonArgs),
    /// Dispersion sheets over the Brillouin zone grid.
    Surface(CommonArgs),
    /// Dirac points in the energy window.
    Dirac(CommonArgs),
    /// Fermi-surface class per energy grid point.
    Fermi(CommonArgs),
    /// Exact vs first-order perturbed dispersion roots.
    Perturb(CommonArgs),
    /// Run the library invariant checks; exits nonzero on any failure.
    Validate(CommonArgs),
}

impl Command {
    fn split(&self) -> (CommandKind, &CommonArgs) {
        match self {
            Command::Bands(a) => (CommandKind::Bands, a),
            Command::Surface(a) => (CommandKind::Surface, a),
            Command::Dirac(a) => (CommandKind::Dirac, a),
            Command::Fermi(a) => (CommandKind::Fermi, a),
            Command::Perturb(a) => (CommandKind::Perturb, a),
            Command::Validate(a) => (CommandKind::Validate, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    let (kind, args) = cli.command.split();

    let cfg = match &args.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("hexaspec: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };

    let outcome = match run_command(kind, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("hexaspec {}: {e}", kind.name());
            return ExitCode::from(1);
        }
    };

    let format = args.format.unwrap_or(cfg.output.format);
    let path = args
        .out
        .clone()
        .or_else(|| (!cfg.output.path.is_empty()).then(|| PathBuf::from(&cfg.output.path)))
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", kind.name(), format.extension())));

    let file = match std::fs::File::create(&path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("hexaspec: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    };
    let mut writer = std::io::BufWriter::new(file);
    if let Err(e) = outcome.dataset.write(format, &mut writer).and_then(|_| writer.flush()) {
        eprintln!("hexaspec: write failed: {e}");
        return ExitCode::from(1);
    }

    if kind == CommandKind::Validate {
        for row in &outcome.dataset.rows {
            if let [dataset::Cell::Str(name), dataset::Cell::Str(status), dataset::Cell::Str(detail)] =
                row.as_slice()
            {
                println!("{status:4}  {name}  ({detail})");
            }
        }
    }
    eprintln!("hexaspec {}: wrote {} rows to {}", kind.name(), outcome.dataset.rows.len(), path.display());

    match outcome.failure {
        Some(e) => {
            eprintln!("hexaspec {}: {e}", kind.name());
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}

/// HEXASPEC_THREADS caps worker parallelism; unset leaves rayon's default.
fn init_thread_pool() {
    if let Ok(value) = std::env::var("HEXASPEC_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
