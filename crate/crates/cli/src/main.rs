//! Command-line front end for the `qcsc` library.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcsc::ErrorCategory;

use commands::Context;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "qcsc", version, about = "Desk-scale quantum simulation, mitigation and resource workflows")]
struct Cli {
    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Seed for every random draw.
    #[arg(long, global = true, env = "QCSC_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for sampling; 0 uses one per processor. Never changes results.
    #[arg(long, global = true, env = "QCSC_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trotter circuits for the Heisenberg chain: gate counts, bound and exact error.
    Trotter(commands::TrotterArgs),
    /// Learn Pauli-Lindblad rates from synthesized decay curves.
    NoiseLearn(commands::NoiseLearnArgs),
    /// Probabilistic error cancellation of a noisy circuit.
    Pec(commands::PecArgs),
    /// Zero-noise extrapolation of a noisy circuit.
    Zne(commands::ZneArgs),
    /// Wire-cut knitting of a circuit.
    Cut(commands::CutArgs),
    /// Variational real-time evolution.
    Varqte(commands::VarqteArgs),
    /// Fault-tolerant space-time volumes.
    EstimateFt(commands::EstimateFtArgs),
    /// Qubit count of a modular, parallelized system.
    Scale(commands::ScaleArgs),
    /// PEC circuit-instance counts over a grid of error rates.
    OverheadTable(commands::OverheadArgs),
    /// Run a circuit on the state-vector simulator.
    Simulate(commands::SimulateArgs),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qcsc::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Parse => "parse",
                ErrorCategory::Validation => "validation",
                ErrorCategory::Numeric => "numeric",
            },
            CliError::Io(..) => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self.category() {
            "parse" => 3,
            "validation" => 4,
            "numeric" => 5,
            _ => 6,
        }
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let ctx = Context {
        seed: cli.seed,
        workers: cli.workers,
    };
    let report = match &cli.command {
        Command::Trotter(a) => commands::trotter(a, &ctx),
        Command::NoiseLearn(a) => commands::noise_learn(a, &ctx),
        Command::Pec(a) => commands::pec(a, &ctx),
        Command::Zne(a) => commands::zne(a, &ctx),
        Command::Cut(a) => commands::cut(a, &ctx),
        Command::Varqte(a) => commands::varqte(a, &ctx),
        Command::EstimateFt(a) => commands::estimate_ft(a, &ctx),
        Command::Scale(a) => commands::scale(a, &ctx),
        Command::OverheadTable(a) => commands::overhead(a, &ctx),
        Command::Simulate(a) => commands::simulate(a, &ctx),
    }?;
    Ok(report.render(cli.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|text| match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e)),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error ({}): {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
