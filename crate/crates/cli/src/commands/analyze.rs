//! `attn analyze`: concentration report over an ingested dataset.
//!
//! Emits `inequality_report.json` (Gini and top shares for followers,
//! retweets, mentions, outbound friends, and tweets), one Lorenz CSV per
//! metric, and `gini_series.csv` with per-window Gini values. Stock metrics
//! (followers, friends) are evaluated at each window's end; flow metrics
//! (retweets, mentions, tweets) are within-window sums.

use super::ingest_logs;
use crate::output::RunContext;
use crate::CliError;
use attn_core::inequality::{gini, InequalityReport, ValueSample};
use attn_core::ingest::EdgeAction;
use attn_core::textfmt::fmt_f64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

const TOP_FRACTIONS: [f64; 2] = [0.01, 0.20];

#[derive(Serialize)]
struct MetricSummary {
    n: usize,
    gini: f64,
    top_shares: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct ReportFile {
    followers: MetricSummary,
    retweets: MetricSummary,
    mentions: MetricSummary,
    friends: MetricSummary,
    tweets: MetricSummary,
}

fn summarize(
    name: &str,
    values: Vec<f64>,
) -> Result<(MetricSummary, attn_core::LorenzCurve), CliError> {
    let sample = ValueSample::new(values).map_err(CliError::from)?;
    let report = InequalityReport::compute(&sample, &TOP_FRACTIONS)
        .map_err(|e| augment(name, e.into()))?;
    let mut top_shares = BTreeMap::new();
    for (fraction, share) in &report.top_shares {
        top_shares.insert(format!("{fraction}"), *share);
    }
    Ok((
        MetricSummary {
            n: sample.len(),
            gini: report.gini,
            top_shares,
        },
        report.lorenz,
    ))
}

fn augment(context: &str, err: CliError) -> CliError {
    match err {
        CliError::Degenerate(m) => CliError::Degenerate(format!("{context}: {m}")),
        CliError::Input(m) => CliError::Input(format!("{context}: {m}")),
        CliError::Numeric(m) => CliError::Numeric(format!("{context}: {m}")),
    }
}

pub fn run(
    edges_path: &Path,
    activity_path: &Path,
    snapshot_path: Option<&Path>,
    window_seconds: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut ctx = RunContext::new("analyze", out_dir)?;
    ctx.config("edges", edges_path.display());
    ctx.config("activity", activity_path.display());
    if let Some(path) = snapshot_path {
        ctx.config("snapshot", path.display());
    }
    ctx.config("out", out_dir.display());
    ctx.config("top_fractions", "0.01,0.20");

    let logs = ingest_logs(&mut ctx, edges_path, activity_path, snapshot_path, window_seconds)?;
    let n_windows = logs.stats.n_windows;

    // Every known user, in the deterministic order the windows carry.
    let users: Vec<&str> = logs
        .windows
        .iter()
        .take_while(|w| w.window_index == 0)
        .map(|w| w.user_id.as_str())
        .collect();
    let user_index: BTreeMap<&str, usize> =
        users.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let n_users = users.len();
    if n_users == 0 {
        return Err(CliError::Degenerate("no users in the dataset".into()));
    }

    // Stock metrics: followers per user at each window end; outbound friends
    // likewise, replayed from the src side of the edge log.
    let mut followers_end = vec![vec![0u64; n_users]; n_windows as usize];
    let mut tweets_w = vec![vec![0f64; n_users]; n_windows as usize];
    let mut retweets_w = vec![vec![0f64; n_users]; n_windows as usize];
    let mut mentions_w = vec![vec![0f64; n_users]; n_windows as usize];
    for w in &logs.windows {
        let u = user_index[w.user_id.as_str()];
        let wi = w.window_index as usize;
        followers_end[wi][u] = (w.f_start + w.gained).saturating_sub(w.lost);
        tweets_w[wi][u] = w.p as f64;
        retweets_w[wi][u] = w.r as f64;
        mentions_w[wi][u] = w.m as f64;
    }

    let mut friends = vec![0i64; n_users];
    if let Some(rows) = &logs.snapshot {
        for row in rows {
            friends[user_index[row.user_id.as_str()]] = row.friends as i64;
        }
    }
    let window_of = |ts: u64| (ts - logs.t0) / window_seconds;
    let mut friends_end = vec![vec![0u64; n_users]; n_windows as usize];
    let mut cursor = 0usize;
    for wi in 0..n_windows {
        while cursor < logs.edges.len() && window_of(logs.edges[cursor].timestamp) == wi {
            let e = &logs.edges[cursor];
            let s = user_index[e.src.as_str()];
            match e.action {
                EdgeAction::Create => friends[s] += 1,
                EdgeAction::Delete => friends[s] -= 1,
            }
            cursor += 1;
        }
        for (u, &f) in friends.iter().enumerate() {
            friends_end[wi as usize][u] = f.max(0) as u64;
        }
    }

    // Final totals for the headline report.
    let final_followers: Vec<f64> = followers_end
        .last()
        .map(|row| row.iter().map(|&f| f as f64).collect())
        .unwrap_or_else(|| vec![0.0; n_users]);
    let final_friends: Vec<f64> = friends_end
        .last()
        .map(|row| row.iter().map(|&f| f as f64).collect())
        .unwrap_or_else(|| vec![0.0; n_users]);
    let sum_over = |per_window: &[Vec<f64>]| -> Vec<f64> {
        let mut total = vec![0.0; n_users];
        for row in per_window {
            for (t, v) in total.iter_mut().zip(row) {
                *t += v;
            }
        }
        total
    };

    let (followers_summary, followers_lorenz) = summarize("followers", final_followers)?;
    let (retweets_summary, retweets_lorenz) = summarize("retweets", sum_over(&retweets_w))?;
    let (mentions_summary, mentions_lorenz) = summarize("mentions", sum_over(&mentions_w))?;
    let (friends_summary, friends_lorenz) = summarize("friends", final_friends)?;
    let (tweets_summary, tweets_lorenz) = summarize("tweets", sum_over(&tweets_w))?;

    // Per-window Gini series.
    let mut series = String::from(
        "window,gini_followers,gini_friends,gini_retweets,gini_mentions,gini_tweets\n",
    );
    for wi in 0..n_windows as usize {
        let gini_of = |name: &str, values: Vec<f64>| -> Result<f64, CliError> {
            let sample = ValueSample::new(values).map_err(CliError::from)?;
            gini(&sample).map_err(|e| augment(&format!("window {wi} {name}"), e.into()))
        };
        let gf = gini_of(
            "followers",
            followers_end[wi].iter().map(|&f| f as f64).collect(),
        )?;
        let gfr = gini_of(
            "friends",
            friends_end[wi].iter().map(|&f| f as f64).collect(),
        )?;
        let gr = gini_of("retweets", retweets_w[wi].clone())?;
        let gm = gini_of("mentions", mentions_w[wi].clone())?;
        let gt = gini_of("tweets", tweets_w[wi].clone())?;
        series.push_str(&format!(
            "{wi},{},{},{},{},{}\n",
            fmt_f64(gf),
            fmt_f64(gfr),
            fmt_f64(gr),
            fmt_f64(gm),
            fmt_f64(gt)
        ));
    }

    let report = ReportFile {
        followers: followers_summary,
        retweets: retweets_summary,
        mentions: mentions_summary,
        friends: friends_summary,
        tweets: tweets_summary,
    };
    let report_json = serde_json::to_vec_pretty(&report)
        .map_err(|e| CliError::Input(format!("report serialization failed: {e}")))?;

    ctx.stage("inequality_report.json", report_json);
    ctx.stage("lorenz_followers.csv", followers_lorenz.to_csv());
    ctx.stage("lorenz_retweets.csv", retweets_lorenz.to_csv());
    ctx.stage("lorenz_mentions.csv", mentions_lorenz.to_csv());
    ctx.stage("lorenz_friends.csv", friends_lorenz.to_csv());
    ctx.stage("lorenz_tweets.csv", tweets_lorenz.to_csv());
    ctx.stage("gini_series.csv", series);
    ctx.flush()
}
