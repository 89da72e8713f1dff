//! Command-line front end for the Gaussian MAC feedback capacity toolkit.
//!
//! Subcommands: capacity, sweep, dual, riccati, simulate, maxcorr. Every
//! command supports --json; sweep emits CSV by default. Exit codes:
//! 0 success, 2 usage error, 3 input error, 4 convergence failure.

mod commands;
mod record;

use clap::{Args, Parser, Subcommand};
use gmacfb_core::Error as CoreError;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gmacfb",
    version,
    about = "Linear-feedback sum-capacity tools for the Gaussian multiple access channel",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct OutputOpts {
    /// Emit a machine-readable JSON record instead of the table.
    #[arg(long)]
    json: bool,
    /// Report rates and capacities in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Cooperation factor and linear-feedback sum-capacity at one (N, P).
    Capacity {
        /// Number of senders (at least 2).
        #[arg(long)]
        senders: usize,
        /// Per-sender block power (noise-normalized, >= 0).
        #[arg(long)]
        power: f64,
        /// Bracket tolerance for the fixed-point solver.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// CSV capacity curve over a power range.
    Sweep {
        #[arg(long)]
        senders: usize,
        #[arg(long)]
        power_min: f64,
        #[arg(long)]
        power_max: f64,
        /// Number of grid points.
        #[arg(long)]
        points: usize,
        /// Space the grid geometrically instead of linearly.
        #[arg(long)]
        log_grid: bool,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Lagrange dual bound J(lambda, gamma) and the strong-duality gap.
    Dual {
        #[arg(long)]
        senders: usize,
        #[arg(long)]
        power: f64,
        /// Dependence-balance multiplier (default: the strong-duality
        /// choice gamma*).
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        /// Power multiplier (default: the first-order condition lambda*).
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Steady-state Riccati solution for the symmetric parameter choice.
    Riccati {
        #[arg(long)]
        senders: usize,
        /// Common amplification factor (> 1).
        #[arg(long)]
        beta: f64,
        /// Also run the fixed-point iteration from two starts and report
        /// the agreement with the closed form.
        #[arg(long)]
        iterative: bool,
        /// Relative convergence tolerance for the iteration.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Iteration cap before the solve is reported as failed.
        #[arg(long, default_value_t = 2_000_000)]
        max_iters: usize,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Monte Carlo simulation of the feedback code.
    Simulate {
        #[arg(long)]
        senders: usize,
        #[arg(long)]
        beta: f64,
        /// Requested rate per sender in bits per complex channel use;
        /// rounded down to the nearest feasible grid.
        #[arg(long)]
        rate: f64,
        /// Blocklength in complex channel uses.
        #[arg(long)]
        blocklength: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-sender power budget in per-real-use units.
        #[arg(long)]
        power: f64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Conditional maximal correlation estimate for a Gaussian triple.
    Maxcorr {
        /// Path to a covariance file: first line N, then N rows of N
        /// whitespace-separated reals. Coordinates 0 and 1 are V1 and V2;
        /// the rest form the conditioning block Y.
        #[arg(long, conflicts_with = "demo_triple")]
        covariance: Option<std::path::PathBuf>,
        /// Use the built-in triple Y = V1 + V2 + Z instead of a file.
        #[arg(long)]
        demo_triple: bool,
        /// Polynomial feature degree of the searched function class.
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
}

/// Command failures mapped to the documented exit codes.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Convergence(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Convergence(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Convergence(_) => CliError::Convergence(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Capacity { senders, power, tol, out } => {
            commands::capacity(senders, power, tol, out)
        }
        Command::Sweep { senders, power_min, power_max, points, log_grid, out } => {
            commands::sweep(senders, power_min, power_max, points, log_grid, out)
        }
        Command::Dual { senders, power, gamma, lambda, out } => {
            commands::dual(senders, power, gamma, lambda, out)
        }
        Command::Riccati { senders, beta, iterative, tol, max_iters, out } => {
            commands::riccati(senders, beta, iterative, tol, max_iters, out)
        }
        Command::Simulate { senders, beta, rate, blocklength, trials, seed, power, out } => {
            commands::simulate(senders, beta, rate, blocklength, trials, seed, power, out)
        }
        Command::Maxcorr { covariance, demo_triple, degree, samples, seed, out } => {
            commands::maxcorr(covariance, demo_triple, degree, samples, seed, out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
