//! `attn windows`: replay raw logs into a per-user windows CSV, the input
//! format of `attn fit`.

use super::ingest_logs;
use crate::output::RunContext;
use crate::CliError;
use attn_core::ingest::write_windows_csv;
use std::path::Path;

pub fn run(
    edges_path: &Path,
    activity_path: &Path,
    snapshot_path: Option<&Path>,
    window_seconds: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut ctx = RunContext::new("windows", out_dir)?;
    ctx.config("edges", edges_path.display());
    ctx.config("activity", activity_path.display());
    if let Some(path) = snapshot_path {
        ctx.config("snapshot", path.display());
    }
    ctx.config("out", out_dir.display());
    let logs = ingest_logs(&mut ctx, edges_path, activity_path, snapshot_path, window_seconds)?;
    ctx.config("n_windows", logs.stats.n_windows);
    ctx.stage("windows.csv", write_windows_csv(&logs.windows));
    ctx.flush()
}
