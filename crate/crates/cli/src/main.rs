//! `attn` — batch pipeline for follower-network attention analysis.
//!
//! Subcommands cover the whole flow: generate a calibrated synthetic
//! dataset, analyze concentration, window raw logs, fit model parameters,
//! predict follower trajectories, and run the generative simulator. Every
//! command is deterministic on its inputs and writes plot-ready CSV/JSON.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod output;

use attn_core::{FitError, IngestError, MetricError, ModelError, SimError};

/// Exit codes: 0 success, 2 input or parse failure, 3 degenerate data,
/// 4 numeric failure.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Degenerate(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Degenerate(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::EmptySample | MetricError::ZeroMean | MetricError::DegenerateSeries => {
                CliError::Degenerate(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Degenerate(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NonFiniteResult { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajectoryMode {
    Closed,
    Ode,
}

#[derive(Parser)]
#[command(
    name = "attn",
    version,
    about = "Follower-network attention dynamics: analyze, fit, predict, simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the bundled calibrated synthetic dataset.
    Synth {
        /// Output directory for snapshot.csv, edges.csv, activity.csv.
        #[arg(long)]
        out: PathBuf,
        /// Generator seed.
        #[arg(long, default_value_t = 123_456_789)]
        seed: u64,
        /// Population size.
        #[arg(long, default_value_t = 5600)]
        users: u64,
        /// Number of follow/unfollow events.
        #[arg(long, default_value_t = 10_000)]
        events: u64,
        /// Number of observation windows spanned by the logs.
        #[arg(long, default_value_t = 3)]
        n_windows: u64,
        /// Window length in seconds.
        #[arg(long, default_value_t = 345_600)]
        window_seconds: u64,
    },
    /// Concentration analysis of an edge log plus activity log.
    Analyze {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        activity: PathBuf,
        /// Optional profile snapshot seeding initial degrees.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, default_value_t = 345_600)]
        window_seconds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Window raw logs into per-user observations (windows.csv).
    Windows {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        activity: PathBuf,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, default_value_t = 345_600)]
        window_seconds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit per-quintile model parameters from a windows CSV.
    Fit {
        #[arg(long)]
        windows: PathBuf,
        /// Population size N (the follow-candidate pool); required, no
        /// default is assumed.
        #[arg(long)]
        population_n: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict follower trajectories from fitted parameters.
    Predict {
        /// Parameter file (JSON or `name=value` lines).
        #[arg(long)]
        params: PathBuf,
        /// Per-user states CSV: user_id,f0,r,m.
        #[arg(long)]
        state: PathBuf,
        /// Horizon in whole periods.
        #[arg(long)]
        horizon: u64,
        #[arg(long, value_enum)]
        mode: TrajectoryMode,
        /// Integration step for ode mode (rounded to divide one period).
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the generative simulator from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ATTN_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth {
            out,
            seed,
            users,
            events,
            n_windows,
            window_seconds,
        } => commands::synth::run(&out, seed, users, events, n_windows, window_seconds),
        Command::Analyze {
            edges,
            activity,
            snapshot,
            window_seconds,
            out,
        } => commands::analyze::run(&edges, &activity, snapshot.as_deref(), window_seconds, &out),
        Command::Windows {
            edges,
            activity,
            snapshot,
            window_seconds,
            out,
        } => commands::windows::run(&edges, &activity, snapshot.as_deref(), window_seconds, &out),
        Command::Fit {
            windows,
            population_n,
            out,
        } => commands::fit::run(&windows, population_n, &out),
        Command::Predict {
            params,
            state,
            horizon,
            mode,
            dt,
            out,
        } => commands::predict::run(&params, &state, horizon, mode, dt, &out),
        Command::Simulate { config, seed, out } => commands::simulate::run(&config, seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("attn: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
