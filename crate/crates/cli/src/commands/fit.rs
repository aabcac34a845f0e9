//! `attn fit`: per-quintile parameter estimation from a windows CSV.
//!
//! Users are ranked into quintiles by their initial follower count; each
//! quintile's pooled windows feed the deterministic regression scheme. A
//! quintile whose data is degenerate is skipped (and reported); the others
//! are still written. The summary RMSE is the follower-scale trajectory one.

use crate::output::RunContext;
use crate::CliError;
use attn_core::fitting::{assign_quintiles, fit_quintile_params};
use attn_core::ingest::parse_windows_csv;
use attn_core::model::Quintile;
use attn_core::textfmt::fmt_f64;
use std::collections::BTreeMap;
use std::path::Path;

pub fn run(windows_path: &Path, population_n: u64, out_dir: &Path) -> Result<(), CliError> {
    let mut ctx = RunContext::new("fit", out_dir)?;
    ctx.config("windows", windows_path.display());
    ctx.config("population_n", population_n);
    ctx.config("out", out_dir.display());

    let bytes = ctx.read_input(windows_path)?;
    let windows = parse_windows_csv(bytes.as_slice())
        .map_err(|e| CliError::Input(format!("{}: {e}", windows_path.display())))?;

    // Rank users by their earliest-window follower count; activity volume is
    // carried along for the quintile summary.
    let mut first_f: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    let mut tweet_total: BTreeMap<&str, u64> = BTreeMap::new();
    for w in &windows {
        let entry = first_f
            .entry(w.user_id.as_str())
            .or_insert((w.window_index, w.f_start));
        if w.window_index < entry.0 {
            *entry = (w.window_index, w.f_start);
        }
        *tweet_total.entry(w.user_id.as_str()).or_insert(0) += w.p;
    }
    let users: Vec<(String, u64, u64)> = first_f
        .iter()
        .map(|(&id, &(_, f))| (id.to_string(), f, tweet_total[id]))
        .collect();
    let max_f = users.iter().map(|u| u.1).max().unwrap_or(0);
    if population_n <= max_f {
        return Err(CliError::Input(format!(
            "population-n {population_n} must exceed the largest follower count {max_f}"
        )));
    }
    let table = assign_quintiles(&users)?;

    let mut summary = String::from("quintile,rmse,n_samples,converged\n");
    let mut failures = Vec::new();
    let mut staged_params = Vec::new();
    for group in &table.groups {
        let members: std::collections::BTreeSet<&str> =
            group.members.iter().map(|s| s.as_str()).collect();
        let quintile_windows: Vec<_> = windows
            .iter()
            .filter(|w| members.contains(w.user_id.as_str()))
            .cloned()
            .collect();
        match fit_quintile_params(group.label, population_n, &quintile_windows) {
            Ok(fit) => {
                if matches!(group.label, Quintile::Q4 | Quintile::Q5) {
                    log::warn!("{} fit is low-confidence (bottom quintile)", group.label);
                    ctx.note(format!("{} fit is low-confidence (bottom quintile)", group.label));
                }
                summary.push_str(&format!(
                    "{},{},{},{}\n",
                    group.label,
                    fmt_f64(fit.report.rmse),
                    fit.report.n_samples,
                    fit.report.converged
                ));
                staged_params.push((
                    format!("params_{}.json", group.label),
                    fit.report.params.to_json(),
                ));
            }
            Err(e) => {
                log::warn!("{}: {e}", group.label);
                ctx.note(format!("{} skipped: {e}", group.label));
                failures.push(format!("{}: {e}", group.label));
            }
        }
    }
    for (name, contents) in staged_params {
        ctx.stage(&name, contents);
    }
    ctx.stage("fit_summary.csv", summary);
    ctx.flush()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Degenerate(format!(
            "{} quintile(s) had degenerate data: {}",
            failures.len(),
            failures.join("; ")
        )))
    }
}
