//! `attn synth`: emit the calibrated synthetic dataset.

use crate::output::RunContext;
use crate::CliError;
use attn_core::ingest::{write_activity_csv, write_edges_csv, write_snapshot_csv};
use attn_core::synth::{generate, SynthConfig};
use std::path::Path;

pub fn run(
    out_dir: &Path,
    seed: u64,
    users: u64,
    events: u64,
    n_windows: u64,
    window_seconds: u64,
) -> Result<(), CliError> {
    if users < 5 {
        return Err(CliError::Input(format!("users must be >= 5, got {users}")));
    }
    if n_windows == 0 || window_seconds == 0 {
        return Err(CliError::Input(
            "n-windows and window-seconds must be positive".into(),
        ));
    }
    let cfg = SynthConfig {
        n_users: users,
        seed,
        n_edge_events: events,
        n_windows,
        window_seconds,
        ..SynthConfig::default()
    };
    let mut ctx = RunContext::new("synth", out_dir)?;
    ctx.config("seed", seed);
    ctx.config("users", users);
    ctx.config("events", events);
    ctx.config("n_windows", n_windows);
    ctx.config("window_seconds", window_seconds);
    ctx.config("t0", cfg.t0);
    ctx.config("out", out_dir.display());

    let data = generate(&cfg);
    ctx.stage("snapshot.csv", write_snapshot_csv(&data.snapshot));
    ctx.stage("edges.csv", write_edges_csv(&data.edges));
    ctx.stage("activity.csv", write_activity_csv(&data.activity));
    ctx.flush()
}
