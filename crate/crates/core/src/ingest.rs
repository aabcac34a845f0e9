//! Ingestion of temporal follow-edge logs and per-user activity logs, and
//! their windowing into fixed observation periods.
//!
//! Both input formats are plain comma-separated text with a mandatory header
//! row and `\n` line endings (a trailing `\r` is tolerated). Replay is
//! deterministic: edges are processed in timestamp order with ties kept in
//! file order.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("parse error at line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("bad action `{token}` at line {line}: expected create or delete")]
    BadAction { line: u64, token: String },
    #[error("timestamp {timestamp} at line {line} precedes the window origin {t0}")]
    TimestampBeforeOrigin { line: u64, timestamp: u64, t0: u64 },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for IngestError {
    fn from(e: std::io::Error) -> Self {
        IngestError::Io(e.to_string())
    }
}

/// Follow or unfollow of `dst` by `src` at a point in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalEdge {
    pub src: String,
    pub dst: String,
    pub action: EdgeAction,
    pub timestamp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeAction {
    Create,
    Delete,
}

impl EdgeAction {
    fn as_str(self) -> &'static str {
        match self {
            EdgeAction::Create => "create",
            EdgeAction::Delete => "delete",
        }
    }
}

/// One activity tally for a user at a point in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityRecord {
    pub user_id: String,
    pub timestamp: u64,
    pub kind: ActivityKind,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivityKind {
    Tweet,
    RetweetReceived,
    MentionReceived,
}

impl ActivityKind {
    fn as_str(self) -> &'static str {
        match self {
            ActivityKind::Tweet => "TWEET",
            ActivityKind::RetweetReceived => "RETWEET_RECEIVED",
            ActivityKind::MentionReceived => "MENTION_RECEIVED",
        }
    }
}

/// Optional profile snapshot seeding initial in/out-degrees when the edge
/// log starts mid-stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotRow {
    pub user_id: String,
    pub followers: u64,
    pub friends: u64,
    pub statuses: u64,
}

/// Fixed-length windowing setup. The default window is four days.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowingConfig {
    pub window_seconds: u64,
    /// Epoch of the first window; a timestamp exactly on a window boundary
    /// belongs to the later window.
    pub t0: u64,
}

pub const DEFAULT_WINDOW_SECONDS: u64 = 345_600;

impl WindowingConfig {
    pub fn new(window_seconds: u64, t0: u64) -> Self {
        assert!(window_seconds > 0, "window_seconds must be positive");
        Self { window_seconds, t0 }
    }
}

/// One user's observables over one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserWindow {
    pub user_id: String,
    pub window_index: u64,
    /// Tweets posted in the window.
    pub p: u64,
    /// Followers at the window start.
    pub f_start: u64,
    /// Retweets received in the window.
    pub r: u64,
    /// Mentions received in the window.
    pub m: u64,
    /// Follow edges created toward the user in the window.
    pub gained: u64,
    /// Follow edges deleted in the window.
    pub lost: u64,
}

/// Rows dropped or flagged while cleaning an edge log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeParseStats {
    /// CREATE rows for an edge that was already active.
    pub duplicate_creates: u64,
    /// DELETE rows for an edge that was not active.
    pub dangling_deletes: u64,
}

/// Bookkeeping from window building.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WindowStats {
    /// Windows where more followers were lost than were present at the
    /// window start (noisy data; the rows are kept).
    pub lost_exceeds_f_start: u64,
    pub n_windows: u64,
}

fn read_lines<R: BufRead>(reader: R) -> Result<Vec<String>, IngestError> {
    let mut lines = Vec::new();
    for line in reader.lines() {
        let mut line = line?;
        if line.ends_with('\r') {
            line.pop();
        }
        lines.push(line);
    }
    Ok(lines)
}

fn expect_header(lines: &[String], expected: &str) -> Result<(), IngestError> {
    match lines.first() {
        Some(first) if first == expected => Ok(()),
        Some(first) => Err(IngestError::Parse {
            line: 1,
            reason: format!("expected header `{expected}`, got `{first}`"),
        }),
        None => Err(IngestError::Parse {
            line: 1,
            reason: format!("missing header `{expected}`"),
        }),
    }
}

fn parse_u64(field: &str, line: u64, what: &str) -> Result<u64, IngestError> {
    field.parse::<u64>().map_err(|_| IngestError::Parse {
        line,
        reason: format!("bad {what} `{field}`"),
    })
}

fn split_exact(
    line_text: &str,
    line: u64,
    n_fields: usize,
) -> Result<Vec<&str>, IngestError> {
    let fields: Vec<&str> = line_text.split(',').collect();
    if fields.len() != n_fields {
        return Err(IngestError::Parse {
            line,
            reason: format!("expected {n_fields} fields, got {}", fields.len()),
        });
    }
    Ok(fields)
}

fn nonempty<'a>(field: &'a str, line: u64, what: &str) -> Result<&'a str, IngestError> {
    if field.is_empty() {
        Err(IngestError::Parse {
            line,
            reason: format!("empty {what}"),
        })
    } else {
        Ok(field)
    }
}

pub const EDGES_HEADER: &str = "src,dst,action,timestamp";
pub const ACTIVITY_HEADER: &str = "user_id,timestamp,kind,count";
pub const SNAPSHOT_HEADER: &str = "user_id,followers,friends,statuses";
pub const WINDOWS_HEADER: &str = "user_id,window,p,f_start,r,m,gained,lost";

/// Parses an edge log, sorts it by timestamp (ties in file order), and drops
/// duplicate CREATEs and dangling DELETEs, counting each in the returned
/// stats. The result replays cleanly: every DELETE deactivates an edge that
/// a prior CREATE activated.
pub fn parse_temporal_edges<R: BufRead>(
    reader: R,
) -> Result<(Vec<TemporalEdge>, EdgeParseStats), IngestError> {
    let lines = read_lines(reader)?;
    expect_header(&lines, EDGES_HEADER)?;
    let mut edges = Vec::new();
    for (i, line_text) in lines.iter().enumerate().skip(1) {
        let line = (i + 1) as u64;
        if line_text.is_empty() {
            continue;
        }
        let fields = split_exact(line_text, line, 4)?;
        let src = nonempty(fields[0], line, "src")?;
        let dst = nonempty(fields[1], line, "dst")?;
        if src == dst {
            return Err(IngestError::Parse {
                line,
                reason: format!("self edge `{src}` -> `{dst}`"),
            });
        }
        let action = if fields[2].eq_ignore_ascii_case("create") {
            EdgeAction::Create
        } else if fields[2].eq_ignore_ascii_case("delete") {
            EdgeAction::Delete
        } else {
            return Err(IngestError::BadAction {
                line,
                token: fields[2].to_string(),
            });
        };
        let timestamp = parse_u64(fields[3], line, "timestamp")?;
        edges.push(TemporalEdge {
            src: src.to_string(),
            dst: dst.to_string(),
            action,
            timestamp,
        });
    }
    // Stable sort keeps ties in file order.
    edges.sort_by_key(|e| e.timestamp);

    let mut stats = EdgeParseStats::default();
    let mut active: BTreeSet<(String, String)> = BTreeSet::new();
    let mut cleaned = Vec::with_capacity(edges.len());
    for edge in edges {
        let key = (edge.src.clone(), edge.dst.clone());
        match edge.action {
            EdgeAction::Create => {
                if active.insert(key) {
                    cleaned.push(edge);
                } else {
                    stats.duplicate_creates += 1;
                }
            }
            EdgeAction::Delete => {
                if active.remove(&key) {
                    cleaned.push(edge);
                } else {
                    stats.dangling_deletes += 1;
                }
            }
        }
    }
    Ok((cleaned, stats))
}

/// Parses an activity log; records come back in input order.
pub fn parse_activity_log<R: BufRead>(reader: R) -> Result<Vec<ActivityRecord>, IngestError> {
    let lines = read_lines(reader)?;
    expect_header(&lines, ACTIVITY_HEADER)?;
    let mut records = Vec::new();
    for (i, line_text) in lines.iter().enumerate().skip(1) {
        let line = (i + 1) as u64;
        if line_text.is_empty() {
            continue;
        }
        let fields = split_exact(line_text, line, 4)?;
        let user_id = nonempty(fields[0], line, "user_id")?;
        let timestamp = parse_u64(fields[1], line, "timestamp")?;
        let kind = if fields[2].eq_ignore_ascii_case("TWEET") {
            ActivityKind::Tweet
        } else if fields[2].eq_ignore_ascii_case("RETWEET_RECEIVED") {
            ActivityKind::RetweetReceived
        } else if fields[2].eq_ignore_ascii_case("MENTION_RECEIVED") {
            ActivityKind::MentionReceived
        } else {
            return Err(IngestError::Parse {
                line,
                reason: format!("unknown activity kind `{}`", fields[2]),
            });
        };
        let count = parse_u64(fields[3], line, "count")?;
        if count == 0 {
            return Err(IngestError::Parse {
                line,
                reason: "count must be >= 1".to_string(),
            });
        }
        records.push(ActivityRecord {
            user_id: user_id.to_string(),
            timestamp,
            kind,
            count,
        });
    }
    Ok(records)
}

/// Parses a profile snapshot.
pub fn parse_snapshot<R: BufRead>(reader: R) -> Result<Vec<SnapshotRow>, IngestError> {
    let lines = read_lines(reader)?;
    expect_header(&lines, SNAPSHOT_HEADER)?;
    let mut rows = Vec::new();
    for (i, line_text) in lines.iter().enumerate().skip(1) {
        let line = (i + 1) as u64;
        if line_text.is_empty() {
            continue;
        }
        let fields = split_exact(line_text, line, 4)?;
        rows.push(SnapshotRow {
            user_id: nonempty(fields[0], line, "user_id")?.to_string(),
            followers: parse_u64(fields[1], line, "followers")?,
            friends: parse_u64(fields[2], line, "friends")?,
            statuses: parse_u64(fields[3], line, "statuses")?,
        });
    }
    Ok(rows)
}

/// Parses a windows CSV previously written by [`write_windows_csv`].
pub fn parse_windows_csv<R: BufRead>(reader: R) -> Result<Vec<UserWindow>, IngestError> {
    let lines = read_lines(reader)?;
    expect_header(&lines, WINDOWS_HEADER)?;
    let mut windows = Vec::new();
    for (i, line_text) in lines.iter().enumerate().skip(1) {
        let line = (i + 1) as u64;
        if line_text.is_empty() {
            continue;
        }
        let fields = split_exact(line_text, line, 8)?;
        windows.push(UserWindow {
            user_id: nonempty(fields[0], line, "user_id")?.to_string(),
            window_index: parse_u64(fields[1], line, "window")?,
            p: parse_u64(fields[2], line, "p")?,
            f_start: parse_u64(fields[3], line, "f_start")?,
            r: parse_u64(fields[4], line, "r")?,
            m: parse_u64(fields[5], line, "m")?,
            gained: parse_u64(fields[6], line, "gained")?,
            lost: parse_u64(fields[7], line, "lost")?,
        });
    }
    Ok(windows)
}

pub fn write_edges_csv(edges: &[TemporalEdge]) -> String {
    let mut out = String::from(EDGES_HEADER);
    out.push('\n');
    for e in edges {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.src,
            e.dst,
            e.action.as_str(),
            e.timestamp
        ));
    }
    out
}

pub fn write_activity_csv(records: &[ActivityRecord]) -> String {
    let mut out = String::from(ACTIVITY_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.user_id,
            r.timestamp,
            r.kind.as_str(),
            r.count
        ));
    }
    out
}

pub fn write_snapshot_csv(rows: &[SnapshotRow]) -> String {
    let mut out = String::from(SNAPSHOT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.user_id, r.followers, r.friends, r.statuses
        ));
    }
    out
}

pub fn write_windows_csv(windows: &[UserWindow]) -> String {
    let mut out = String::from(WINDOWS_HEADER);
    out.push('\n');
    for w in windows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            w.user_id, w.window_index, w.p, w.f_start, w.r, w.m, w.gained, w.lost
        ));
    }
    out
}

/// Replays edges and activity into per-user windows.
///
/// The window of a timestamp is `floor((timestamp - t0) / window_seconds)`;
/// a timestamp exactly on a boundary belongs to the later window. Every
/// known user gets a row for every window, with zero counts and the
/// carried-forward follower count when nothing happened. The snapshot, when
/// given, seeds initial in-degrees.
pub fn build_windows(
    edges: &[TemporalEdge],
    activity: &[ActivityRecord],
    snapshot: Option<&[SnapshotRow]>,
    cfg: WindowingConfig,
) -> Result<(Vec<UserWindow>, WindowStats), IngestError> {
    for (i, e) in edges.iter().enumerate() {
        if e.timestamp < cfg.t0 {
            return Err(IngestError::TimestampBeforeOrigin {
                line: i as u64 + 2,
                timestamp: e.timestamp,
                t0: cfg.t0,
            });
        }
    }
    for (i, a) in activity.iter().enumerate() {
        if a.timestamp < cfg.t0 {
            return Err(IngestError::TimestampBeforeOrigin {
                line: i as u64 + 2,
                timestamp: a.timestamp,
                t0: cfg.t0,
            });
        }
    }
    let window_of = |ts: u64| (ts - cfg.t0) / cfg.window_seconds;

    let mut users: BTreeSet<&str> = BTreeSet::new();
    if let Some(rows) = snapshot {
        users.extend(rows.iter().map(|r| r.user_id.as_str()));
    }
    for e in edges {
        users.insert(e.src.as_str());
        users.insert(e.dst.as_str());
    }
    for a in activity {
        users.insert(a.user_id.as_str());
    }

    let n_windows = edges
        .iter()
        .map(|e| window_of(e.timestamp))
        .chain(activity.iter().map(|a| window_of(a.timestamp)))
        .max()
        .map(|max_idx| max_idx + 1)
        .unwrap_or(0);

    let mut in_degree: BTreeMap<&str, i64> = users.iter().map(|&u| (u, 0i64)).collect();
    if let Some(rows) = snapshot {
        for row in rows {
            *in_degree.get_mut(row.user_id.as_str()).expect("seeded") += row.followers as i64;
        }
    }

    // Activity sums per (user, window).
    let mut activity_sums: BTreeMap<(&str, u64), (u64, u64, u64)> = BTreeMap::new();
    for a in activity {
        let entry = activity_sums
            .entry((a.user_id.as_str(), window_of(a.timestamp)))
            .or_insert((0, 0, 0));
        match a.kind {
            ActivityKind::Tweet => entry.0 += a.count,
            ActivityKind::RetweetReceived => entry.1 += a.count,
            ActivityKind::MentionReceived => entry.2 += a.count,
        }
    }

    let mut stats = WindowStats {
        n_windows,
        ..WindowStats::default()
    };
    let mut windows = Vec::new();
    let mut edge_cursor = 0usize;
    for w in 0..n_windows {
        let f_start: BTreeMap<&str, u64> = in_degree
            .iter()
            .map(|(&u, &d)| (u, d.max(0) as u64))
            .collect();
        let mut gained: BTreeMap<&str, u64> = BTreeMap::new();
        let mut lost: BTreeMap<&str, u64> = BTreeMap::new();
        while edge_cursor < edges.len() && window_of(edges[edge_cursor].timestamp) == w {
            let e = &edges[edge_cursor];
            match e.action {
                EdgeAction::Create => {
                    *gained.entry(e.dst.as_str()).or_insert(0) += 1;
                    *in_degree.get_mut(e.dst.as_str()).expect("known user") += 1;
                }
                EdgeAction::Delete => {
                    *lost.entry(e.dst.as_str()).or_insert(0) += 1;
                    *in_degree.get_mut(e.dst.as_str()).expect("known user") -= 1;
                }
            }
            edge_cursor += 1;
        }
        for &user in &users {
            let (p, r, m) = activity_sums
                .get(&(user, w))
                .copied()
                .unwrap_or((0, 0, 0));
            let row = UserWindow {
                user_id: user.to_string(),
                window_index: w,
                p,
                f_start: f_start[user],
                r,
                m,
                gained: gained.get(user).copied().unwrap_or(0),
                lost: lost.get(user).copied().unwrap_or(0),
            };
            if row.lost > row.f_start {
                stats.lost_exceeds_f_start += 1;
            }
            windows.push(row);
        }
    }
    Ok((windows, stats))
}

/// One empirical (attention, transition probability) observation derived
/// from a window. `p_plus` is `None` when the follow pool was empty
/// (`f_start >= n`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionSample {
    pub r: f64,
    pub m: f64,
    pub p_plus: Option<f64>,
    pub p_minus: f64,
}

/// Derives empirical transition probabilities from windows:
/// `P+ = gained / (n - f_start)` over the available pool and
/// `P- = lost / max(f_start, 1)` over the current followers, both clamped
/// to [0, 1]. Returns the samples and the count of rows skipped for `P+`.
pub fn empirical_transition_probs(
    windows: &[UserWindow],
    n: u64,
) -> (Vec<TransitionSample>, usize) {
    let mut samples = Vec::with_capacity(windows.len());
    let mut skipped = 0usize;
    for w in windows {
        let p_plus = if w.f_start < n {
            let pool = (n - w.f_start) as f64;
            Some((w.gained as f64 / pool).clamp(0.0, 1.0))
        } else {
            skipped += 1;
            None
        };
        let p_minus = (w.lost as f64 / (w.f_start.max(1)) as f64).clamp(0.0, 1.0);
        samples.push(TransitionSample {
            r: w.r as f64,
            m: w.m as f64,
            p_plus,
            p_minus,
        });
    }
    (samples, skipped)
}
