pub mod analyze;
pub mod fit;
pub mod predict;
pub mod simulate;
pub mod synth;
pub mod windows;

use crate::output::RunContext;
use crate::CliError;
use attn_core::ingest::{
    build_windows, parse_activity_log, parse_snapshot, parse_temporal_edges, SnapshotRow,
    TemporalEdge, UserWindow, WindowStats, WindowingConfig,
};
use std::path::Path;

/// Shared ingestion front-end: reads and parses the edge log, activity log
/// and optional snapshot, recording digests, then replays into windows with
/// the origin at the earliest event.
pub struct IngestedLogs {
    pub edges: Vec<TemporalEdge>,
    pub snapshot: Option<Vec<SnapshotRow>>,
    pub windows: Vec<UserWindow>,
    pub stats: WindowStats,
    pub t0: u64,
}

pub fn ingest_logs(
    ctx: &mut RunContext,
    edges_path: &Path,
    activity_path: &Path,
    snapshot_path: Option<&Path>,
    window_seconds: u64,
) -> Result<IngestedLogs, CliError> {
    if window_seconds == 0 {
        return Err(CliError::Input("window-seconds must be positive".into()));
    }
    let edge_bytes = ctx.read_input(edges_path)?;
    let (edges, edge_stats) = parse_temporal_edges(edge_bytes.as_slice())
        .map_err(|e| CliError::Input(format!("{}: {e}", edges_path.display())))?;
    if edge_stats.duplicate_creates + edge_stats.dangling_deletes > 0 {
        log::warn!(
            "edge log cleaned: {} duplicate creates, {} dangling deletes dropped",
            edge_stats.duplicate_creates,
            edge_stats.dangling_deletes
        );
        ctx.note(format!(
            "dropped {} duplicate creates and {} dangling deletes",
            edge_stats.duplicate_creates, edge_stats.dangling_deletes
        ));
    }
    let activity_bytes = ctx.read_input(activity_path)?;
    let activity = parse_activity_log(activity_bytes.as_slice())
        .map_err(|e| CliError::Input(format!("{}: {e}", activity_path.display())))?;
    let snapshot = match snapshot_path {
        Some(path) => {
            let bytes = ctx.read_input(path)?;
            Some(
                parse_snapshot(bytes.as_slice())
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };

    let t0 = edges
        .iter()
        .map(|e| e.timestamp)
        .chain(activity.iter().map(|a| a.timestamp))
        .min()
        .ok_or_else(|| CliError::Degenerate("no events in either log".into()))?;
    let cfg = WindowingConfig::new(window_seconds, t0);
    let (windows, stats) = build_windows(&edges, &activity, snapshot.as_deref(), cfg)?;
    if stats.lost_exceeds_f_start > 0 {
        log::warn!(
            "{} windows lost more followers than were present at the window start",
            stats.lost_exceeds_f_start
        );
    }
    ctx.config("window_seconds", window_seconds);
    ctx.config("t0", t0);
    Ok(IngestedLogs {
        edges,
        snapshot,
        windows,
        stats,
        t0,
    })
}
