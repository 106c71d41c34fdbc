//! Command-line front end: binds TOML run configurations to the library
//! and writes each run's outputs plus a manifest into one directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use commands::Failure;

#[derive(Parser)]
#[command(name = "hdlasso", version, about = "Sparse regression and nowcasting for dependent data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one dataset and write it alongside its generating truth.
    Simulate(RunArgs),
    /// Monte Carlo estimation and forecasting study over a design grid.
    Experiment(RunArgs),
    /// Rolling mixed-frequency evaluation over a panel of CSV series.
    Nowcast(RunArgs),
    /// Coupled-simulation dependence measures and aggregate norms.
    Depnorm(RunArgs),
    /// Identifiability diagnostics for a covariance matrix.
    Conditions(RunArgs),
    /// Penalty, sample-size, and error-bound scalings over a grid.
    Rates(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap the worker thread count. Outputs do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the configured replicate count.
    #[arg(long)]
    mc_reps: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args, run): (_, _, fn(&RunArgs) -> Result<(), Failure>) = match &cli.command {
        Command::Simulate(a) => ("simulate", a, commands::simulate),
        Command::Experiment(a) => ("experiment", a, commands::experiment),
        Command::Nowcast(a) => ("nowcast", a, commands::nowcast),
        Command::Depnorm(a) => ("depnorm", a, commands::depnorm),
        Command::Conditions(a) => ("conditions", a, commands::conditions),
        Command::Rates(a) => ("rates", a, commands::rates),
    };
    if let Err(f) = setup_threads(args).and_then(|()| run(args)) {
        eprintln!("error: {}", f.message());
        return ExitCode::from(f.exit_code());
    }
    eprintln!("{name}: outputs written to {}", args.out.display());
    ExitCode::SUCCESS
}

/// Sizes the global worker pool before any parallel region starts.
fn setup_threads(args: &RunArgs) -> Result<(), Failure> {
    let Some(n) = args.threads else { return Ok(()) };
    if n == 0 {
        return Err(Failure::Config("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(format!("cannot size the thread pool: {e}")))
}
