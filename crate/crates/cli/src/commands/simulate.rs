//! `attn simulate`: run the generative simulator from a JSON config.

use crate::output::RunContext;
use crate::CliError;
use attn_core::sim::{run as run_sim, write_metrics_csv, write_users_csv, SimConfig};
use std::path::Path;

pub fn run(config_path: &Path, seed_override: Option<u64>, out_dir: &Path) -> Result<(), CliError> {
    let mut ctx = RunContext::new("simulate", out_dir)?;
    ctx.config("config", config_path.display());
    ctx.config("out", out_dir.display());

    let bytes = ctx.read_input(config_path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Input(format!("{} is not UTF-8", config_path.display())))?;
    let mut cfg = SimConfig::from_json(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", config_path.display())))?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    ctx.config("seed", cfg.seed);
    ctx.config("n_users", cfg.n_users);
    ctx.config("n_steps", cfg.n_steps);

    let state = run_sim(&cfg)?;
    ctx.stage("sim_metrics.csv", write_metrics_csv(&state.metrics_series));
    ctx.stage("sim_users.csv", write_users_csv(&state));
    ctx.flush()
}
