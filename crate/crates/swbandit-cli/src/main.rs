//! `swbandit` — experiment workflows for restless-bandit simulations.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 configuration or input
//! error, 3 output I/O failure.

mod commands;
mod config;
mod svg;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use swbandit::Error;

#[derive(Parser)]
#[command(
    name = "swbandit",
    about = "Simulate, sweep and analyze sliding-window bandit policies on drifting reward trajectories.",
    version
)]
struct Cli {
    /// Worker threads for replications (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured policy and write regret curves, a summary and a plot.
    Simulate {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run one windowed policy across the configured window lengths.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute structure reports for a trajectory file.
    Analyze {
        /// Trajectory CSV (metadata sidecar expected next to it).
        #[arg(long)]
        traj: PathBuf,
        /// Window lengths, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        tau: Vec<usize>,
        /// Near-tie threshold for the smooth-drift sections.
        #[arg(long)]
        delta_prime: Option<f64>,
        /// Near-tie size cap factor (with --cap-beta).
        #[arg(long)]
        cap_f: Option<f64>,
        /// Near-tie size cap exponent (with --cap-f).
        #[arg(long)]
        cap_beta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a configuration without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the fast invariant suite.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    let result = match &cli.command {
        Command::Simulate { config, out } => commands::cmd_simulate(config, out),
        Command::Sweep { config, out } => commands::cmd_sweep(config, out),
        Command::Analyze {
            traj,
            tau,
            delta_prime,
            cap_f,
            cap_beta,
            out,
        } => commands::cmd_analyze(traj, tau, *delta_prime, *cap_f, *cap_beta, out),
        Command::Validate { config } => commands::cmd_validate(config),
        Command::Selftest => return ExitCode::from(commands::cmd_selftest() as u8),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parameter(_) | Error::Config(_) | Error::Format(_) => 2,
                Error::Io(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}
