//! Deterministic synthetic-dataset generator.
//!
//! Produces a profile snapshot, a temporal edge log and an activity log that
//! together exercise the whole pipeline. The population is calibrated so the
//! follower distribution reproduces the documented concentration targets:
//! per-quintile mean followers and statuses, an overall follower Gini above
//! 0.90, and a top-1% follower share near 0.60. Those numbers are generation
//! targets, not measurements of any real system.
//!
//! Everything derives from the config seed through fixed substreams, so two
//! runs with the same config emit byte-identical files.

use crate::ingest::{ActivityKind, ActivityRecord, EdgeAction, SnapshotRow, TemporalEdge};
use crate::sim::substream_seed;
use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, Normal, Uniform};
use rand_pcg::Pcg64;

/// Per-quintile mean follower targets, most-followed first.
const FOLLOWER_MEANS: [f64; 5] = [29_021.0, 1_058.0, 445.0, 90.0, 8.0];
/// Per-quintile mean status-count targets.
const STATUS_MEANS: [f64; 5] = [14_086.0, 7_184.0, 4_053.0, 1_500.0, 300.0];
/// Pareto-like tail exponent of the top quintile; tuned so the top 1% of
/// users hold about 60% of all followers.
const Q1_TAIL_EXPONENT: f64 = 1.02;
/// Within-quintile geometric spread of quintiles 2-4.
const RAMP_RATIOS: [f64; 3] = [2.1, 1.9, 3.5];
/// Bottom-quintile spread and zero-follower fraction.
const Q5_RATIO: f64 = 30.0;
const Q5_ZERO_FRACTION: f64 = 0.25;

const FRIENDS_MEAN: f64 = 700.0;
const FRIENDS_RATIO: f64 = 100.0;

/// Fraction of edge events that are unfollows (when an active edge exists).
const DELETE_FRACTION: f64 = 0.28;

/// Per-window activity rates as fractions of the profile counts.
const TWEET_RATE: f64 = 0.0004;
const RETWEET_RATE: f64 = 0.0015;
const MENTION_RATE: f64 = 0.0004;

// Substream tags.
const STREAM_FOLLOWERS: u64 = 1;
const STREAM_STATUSES: u64 = 2;
const STREAM_FRIENDS: u64 = 3;
const STREAM_EDGES: u64 = 4;
const STREAM_ACTIVITY: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub n_users: u64,
    pub seed: u64,
    pub n_edge_events: u64,
    pub n_windows: u64,
    pub window_seconds: u64,
    pub t0: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 5600,
            seed: 123_456_789,
            n_edge_events: 10_000,
            n_windows: 3,
            window_seconds: 345_600,
            t0: 1_600_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub snapshot: Vec<SnapshotRow>,
    pub edges: Vec<TemporalEdge>,
    pub activity: Vec<ActivityRecord>,
}

fn user_id(index: usize) -> String {
    format!("u{index:05}")
}

/// Descending geometric ramp with multiplicative jitter, rescaled so the
/// mean hits the target exactly.
fn scaled_ramp(
    count: usize,
    ratio: f64,
    target_mean: f64,
    jitter_ln: f64,
    rng: &mut Pcg64,
) -> Vec<f64> {
    let jitter = Uniform::new_inclusive(-jitter_ln, jitter_ln).expect("valid range");
    let mut values: Vec<f64> = (0..count)
        .map(|j| {
            let x = 1.0 - (j as f64 + 0.5) / count as f64;
            ratio.powf(x) * jitter.sample(rng).exp()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / count as f64;
    for v in &mut values {
        *v *= target_mean / mean;
    }
    values
}

/// Descending heavy-tail ranks `((j + 0.5) / count)^(-1/a)` with jitter,
/// rescaled to the target mean.
fn scaled_tail(
    count: usize,
    tail_exponent: f64,
    target_mean: f64,
    jitter_ln: f64,
    rng: &mut Pcg64,
) -> Vec<f64> {
    let jitter = Uniform::new_inclusive(-jitter_ln, jitter_ln).expect("valid range");
    let e = 1.0 / tail_exponent;
    let mut values: Vec<f64> = (0..count)
        .map(|j| {
            let u = (j as f64 + 0.5) / count as f64;
            u.powf(-e) * jitter.sample(rng).exp()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / count as f64;
    for v in &mut values {
        *v *= target_mean / mean;
    }
    values
}

fn quintile_sizes(n: usize) -> [usize; 5] {
    let base = n / 5;
    let extra = n % 5;
    let mut sizes = [base; 5];
    for slot in sizes.iter_mut().take(extra) {
        *slot += 1;
    }
    sizes
}

fn follower_values(sizes: &[usize; 5], rng: &mut Pcg64) -> Vec<f64> {
    let mut out = Vec::new();
    out.extend(scaled_tail(
        sizes[0],
        Q1_TAIL_EXPONENT,
        FOLLOWER_MEANS[0],
        0.05,
        rng,
    ));
    for q in 1..4 {
        out.extend(scaled_ramp(
            sizes[q],
            RAMP_RATIOS[q - 1],
            FOLLOWER_MEANS[q],
            0.05,
            rng,
        ));
    }
    // Bottom quintile: a ramp over the nonzero part plus a block of zeros;
    // zero follower counts are common at the tail.
    let q5 = sizes[4];
    let zeros = (q5 as f64 * Q5_ZERO_FRACTION) as usize;
    let nonzero = q5 - zeros;
    let q5_mean = FOLLOWER_MEANS[4] * q5 as f64 / nonzero as f64;
    out.extend(scaled_ramp(nonzero, Q5_RATIO, q5_mean, 0.05, rng));
    out.extend(std::iter::repeat_n(0.0, zeros));
    out
}

/// Generates the calibrated dataset for the given config.
pub fn generate(cfg: &SynthConfig) -> SynthDataset {
    assert!(cfg.n_users >= 5, "need at least 5 users");
    assert!(cfg.window_seconds > 0);
    let n = cfg.n_users as usize;
    let sizes = quintile_sizes(n);

    let mut rng_followers = Pcg64::seed_from_u64(substream_seed(cfg.seed, STREAM_FOLLOWERS, 0));
    let followers = follower_values(&sizes, &mut rng_followers);

    let mut rng_statuses = Pcg64::seed_from_u64(substream_seed(cfg.seed, STREAM_STATUSES, 0));
    let mut statuses = Vec::with_capacity(n);
    for (q, &size) in sizes.iter().enumerate() {
        statuses.extend(scaled_ramp(size, 3.0, STATUS_MEANS[q], 0.3, &mut rng_statuses));
    }

    let mut rng_friends = Pcg64::seed_from_u64(substream_seed(cfg.seed, STREAM_FRIENDS, 0));
    let friends = scaled_ramp(n, FRIENDS_RATIO, FRIENDS_MEAN, 0.4, &mut rng_friends);

    let snapshot: Vec<SnapshotRow> = (0..n)
        .map(|i| SnapshotRow {
            user_id: user_id(i),
            followers: followers[i].round().max(0.0) as u64,
            friends: friends[i].round().max(0.0) as u64,
            statuses: statuses[i].round().max(0.0) as u64,
        })
        .collect();

    let edges = generate_edges(cfg, &snapshot);
    let activity = generate_activity(cfg, &snapshot);
    SynthDataset {
        snapshot,
        edges,
        activity,
    }
}

fn generate_edges(cfg: &SynthConfig, snapshot: &[SnapshotRow]) -> Vec<TemporalEdge> {
    let n = snapshot.len();
    let mut rng = Pcg64::seed_from_u64(substream_seed(cfg.seed, STREAM_EDGES, 0));
    let span = cfg.n_windows * cfg.window_seconds;

    // Preferential target sampling: cumulative follower weights (plus one so
    // zero-follower users stay reachable).
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0f64;
    for row in snapshot {
        acc += row.followers as f64 + 1.0;
        cumulative.push(acc);
    }
    let total_weight = acc;

    // Timestamps first, with a few forced exactly onto window boundaries to
    // pin the boundary-assignment rule in fixtures.
    let mut timestamps: Vec<u64> = Vec::with_capacity(cfg.n_edge_events as usize);
    for k in 1..cfg.n_windows {
        for _ in 0..3 {
            if (timestamps.len() as u64) < cfg.n_edge_events {
                timestamps.push(cfg.t0 + k * cfg.window_seconds);
            }
        }
    }
    while (timestamps.len() as u64) < cfg.n_edge_events {
        timestamps.push(cfg.t0 + rng.random_range(0..span));
    }
    timestamps.sort_unstable();

    // Walk in time order so deletes always deactivate a live edge and
    // creates never duplicate one; the emitted log replays with no warnings.
    let mut active: Vec<(usize, usize)> = Vec::new();
    let mut active_set: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(timestamps.len());
    for &timestamp in &timestamps {
        let make_delete = !active.is_empty() && rng.random::<f64>() < DELETE_FRACTION;
        if make_delete {
            let idx = rng.random_range(0..active.len());
            let (src, dst) = active.swap_remove(idx);
            active_set.remove(&(src, dst));
            edges.push(TemporalEdge {
                src: user_id(src),
                dst: user_id(dst),
                action: EdgeAction::Delete,
                timestamp,
            });
        } else {
            let (src, dst) = loop {
                let u: f64 = rng.random::<f64>() * total_weight;
                let dst = cumulative.partition_point(|&c| c <= u).min(n - 1);
                let src = rng.random_range(0..n);
                if src != dst && !active_set.contains(&(src, dst)) {
                    break (src, dst);
                }
            };
            active.push((src, dst));
            active_set.insert((src, dst));
            edges.push(TemporalEdge {
                src: user_id(src),
                dst: user_id(dst),
                action: EdgeAction::Create,
                timestamp,
            });
        }
    }
    edges
}

fn generate_activity(cfg: &SynthConfig, snapshot: &[SnapshotRow]) -> Vec<ActivityRecord> {
    let mut rng = Pcg64::seed_from_u64(substream_seed(cfg.seed, STREAM_ACTIVITY, 0));
    let noise = Normal::new(0.0, 0.4).expect("valid sigma");
    let mut records = Vec::new();
    for (i, row) in snapshot.iter().enumerate() {
        for w in 0..cfg.n_windows {
            let window_start = cfg.t0 + w * cfg.window_seconds;
            let mut emit = |kind: ActivityKind, rate: f64, rng: &mut Pcg64| {
                let factor: f64 = noise.sample(rng);
                let count = (rate * factor.exp()).round() as i64;
                if count >= 1 {
                    let offset = rng.random_range(0..cfg.window_seconds);
                    records.push(ActivityRecord {
                        user_id: user_id(i),
                        timestamp: window_start + offset,
                        kind,
                        count: count as u64,
                    });
                }
            };
            emit(ActivityKind::Tweet, row.statuses as f64 * TWEET_RATE, &mut rng);
            emit(
                ActivityKind::RetweetReceived,
                row.followers as f64 * RETWEET_RATE,
                &mut rng,
            );
            emit(
                ActivityKind::MentionReceived,
                row.followers as f64 * MENTION_RATE,
                &mut rng,
            );
        }
    }
    records
}
