//! `privthresh`: run private thresholding-bandit experiments, evaluate bounds
//! and audit the privacy mechanism.
//!
//! Exit codes: 0 success, 1 runtime failure (including a failed audit),
//! 2 usage or configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use privthresh_core::Instance;

use commands::Complexity;

#[derive(Parser)]
#[command(name = "privthresh", version, about = "Thresholding bandits under local differential privacy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo loss of the fixed-budget algorithm; writes CSV.
    FixedBudget(RunArgs),
    /// Monte Carlo correctness and stopping time of the fixed-confidence algorithm; writes CSV.
    FixedConfidence(RunArgs),
    /// Evaluate all four bounds as JSON.
    Bounds(BoundsArgs),
    /// Likelihood-ratio audit of the privatization mechanism.
    Audit(AuditArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    config: PathBuf,
    /// CSV destination; overrides `sweep.output`. Defaults to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Privatized complexity H_eps, used instead of an instance.
    #[arg(long, requires = "arms", conflicts_with_all = ["means", "threshold"])]
    h_eps: Option<f64>,
    /// Number of arms, with --h-eps.
    #[arg(long)]
    arms: Option<usize>,
    /// Arm means, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "threshold")]
    means: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tolerance: f64,
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
    /// Fixed budget T.
    #[arg(long = "budget", short = 'T')]
    budget: u64,
    #[arg(long, allow_negative_numbers = true)]
    delta: f64,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
}

pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: String) -> Self {
        Failure::Usage(anyhow::anyhow!(msg))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::FixedBudget(a) => {
            let spec = config::load_sweep(&a.config).map_err(Failure::Usage)?;
            commands::fixed_budget(&spec, a.output.as_deref())
        }
        Command::FixedConfidence(a) => {
            let spec = config::load_sweep(&a.config).map_err(Failure::Usage)?;
            commands::fixed_confidence(&spec, a.output.as_deref())
        }
        Command::Bounds(a) => {
            let source = match (a.h_eps, a.arms, a.means, a.threshold) {
                (Some(h_eps), Some(arms), _, _) => Complexity::Direct { h_eps, arms },
                (None, _, Some(means), Some(threshold)) => Complexity::Instance(
                    Instance::new(means, threshold, a.tolerance).map_err(|e| Failure::Usage(e.into()))?,
                ),
                _ => return Err(Failure::usage("give either --h-eps with --arms, or --means with --threshold".into())),
            };
            commands::bounds(source, a.eps, a.budget, a.delta)
        }
        Command::Audit(a) => commands::audit(a.eps, a.grid_step),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage errors
            e.exit();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
