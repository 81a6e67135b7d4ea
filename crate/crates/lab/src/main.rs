//! duality-lab: scenario configs in, reproducible CSV/JSON results out.
//!
//! Exit codes: 0 success, 1 bound violation, 2 config error, 3 numerical or
//! I/O failure.

mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use scenario::{EngineChoice, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("bound violated: {0}")]
    Violation(String),
    #[error("run failed: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "duality-lab",
    version,
    about = "Central spin model vs nonlinear qubit: simulate both pictures and check the bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for the CSV and JSON outputs (created if missing).
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Override the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's engine choice.
    #[arg(long, value_enum)]
    engine: Option<EngineChoice>,
}

#[derive(Subcommand)]
enum Command {
    /// Trace-distance series between mean-field and exact central state,
    /// with the closed-form error bound per grid point.
    Duality(RunArgs),
    /// Fit log(distance) vs log(n−1) at a fixed time across system sizes.
    Scaling(RunArgs),
    /// Sample the commutator-growth (Lieb-Robinson) ratio against its bound.
    Lr(RunArgs),
    /// Sample two-point covariances against the decay bound.
    Covariance(RunArgs),
    /// Measure torsion frequencies across axis projections.
    Torsion(RunArgs),
    /// Track the distance ratio of two nearby states under the same flow.
    Expansive(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Duality(a)
            | Command::Scaling(a)
            | Command::Lr(a)
            | Command::Covariance(a)
            | Command::Torsion(a)
            | Command::Expansive(a) => a,
        }
    }
}

fn configure_threads() {
    if let Ok(raw) = std::env::var("DUALITY_LAB_THREADS") {
        if let Ok(threads) = raw.parse::<usize>() {
            if threads >= 1 {
                // Ignore failure if a pool already exists (tests).
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn resolve(args: &RunArgs) -> Result<Scenario, CliError> {
    let mut scenario = Scenario::load(&args.config)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(engine) = args.engine {
        scenario.engine = engine;
    }
    Ok(scenario)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads();
    let args = cli.command.args();
    let scenario = resolve(args)?;
    match &cli.command {
        Command::Duality(a) => commands::cmd_duality(&scenario, &a.out_dir),
        Command::Scaling(a) => commands::cmd_scaling(&scenario, &a.out_dir),
        Command::Lr(a) => commands::cmd_lr(&scenario, &a.out_dir),
        Command::Covariance(a) => commands::cmd_covariance(&scenario, &a.out_dir),
        Command::Torsion(a) => commands::cmd_torsion(&scenario, &a.out_dir),
        Command::Expansive(a) => commands::cmd_expansive(&scenario, &a.out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("duality-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
