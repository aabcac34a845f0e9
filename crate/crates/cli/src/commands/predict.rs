//! `attn predict`: follower trajectories from fitted parameters.
//!
//! Two trajectory routes share one output schema: `closed` evaluates the
//! closed-form solution at whole periods, `ode` integrates the clamped rate
//! equation with fixed-step Runge-Kutta. Their values legitimately differ;
//! nothing cross-checks them against each other.

use crate::output::RunContext;
use crate::{CliError, TrajectoryMode};
use attn_core::inequality::{gini, ValueSample};
use attn_core::model::{
    follower_trajectory_closed, follower_trajectory_ode, AttentionState, ModelParams,
};
use attn_core::textfmt::{fmt_f64, parse_f64};
use std::path::Path;

struct StateRow {
    user_id: String,
    state: AttentionState,
}

const STATE_HEADER: &str = "user_id,f0,r,m";

fn parse_states(text: &str) -> Result<Vec<StateRow>, CliError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == STATE_HEADER => {}
        Some((_, header)) => {
            return Err(CliError::Input(format!(
                "expected header `{STATE_HEADER}`, got `{header}`"
            )));
        }
        None => return Err(CliError::Input("state file is empty".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let no = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::Input(format!(
                "line {no}: expected 4 fields, got {}",
                fields.len()
            )));
        }
        let f0: u64 = fields[1]
            .parse()
            .map_err(|_| CliError::Input(format!("line {no}: bad f0 `{}`", fields[1])))?;
        let r = parse_f64(fields[2])
            .filter(|v| *v >= 0.0)
            .ok_or_else(|| CliError::Input(format!("line {no}: bad r `{}`", fields[2])))?;
        let m = parse_f64(fields[3])
            .filter(|v| *v >= 0.0)
            .ok_or_else(|| CliError::Input(format!("line {no}: bad m `{}`", fields[3])))?;
        rows.push(StateRow {
            user_id: fields[0].to_string(),
            state: AttentionState { f0, r, m, p: 0.0 },
        });
    }
    if rows.is_empty() {
        return Err(CliError::Degenerate("state file has no users".into()));
    }
    Ok(rows)
}

/// Accepts either the JSON or the flat `name=value` parameter format.
fn parse_params(text: &str, path: &Path) -> Result<ModelParams, CliError> {
    let trimmed = text.trim_start();
    let result = if trimmed.starts_with('{') {
        ModelParams::from_json(text)
    } else {
        ModelParams::from_key_value(text)
    };
    result.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn run(
    params_path: &Path,
    state_path: &Path,
    horizon: u64,
    mode: TrajectoryMode,
    dt: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut ctx = RunContext::new("predict", out_dir)?;
    ctx.config("params", params_path.display());
    ctx.config("state", state_path.display());
    ctx.config("horizon", horizon);
    ctx.config(
        "mode",
        match mode {
            TrajectoryMode::Closed => "closed",
            TrajectoryMode::Ode => "ode",
        },
    );
    ctx.config("out", out_dir.display());

    let params_bytes = ctx.read_input(params_path)?;
    let params_text = String::from_utf8(params_bytes)
        .map_err(|_| CliError::Input(format!("{} is not UTF-8", params_path.display())))?;
    let params = parse_params(&params_text, params_path)?;

    let state_bytes = ctx.read_input(state_path)?;
    let state_text = String::from_utf8(state_bytes)
        .map_err(|_| CliError::Input(format!("{} is not UTF-8", state_path.display())))?;
    let rows = parse_states(&state_text)?;

    // Predicted follower count per user at each whole period 0..=horizon.
    let mut per_user: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    match mode {
        TrajectoryMode::Closed => {
            for row in &rows {
                let mut series = Vec::with_capacity(horizon as usize + 1);
                for t in 0..=horizon {
                    let point = follower_trajectory_closed(&params, &row.state, t as f64)
                        .map_err(|e| {
                            CliError::Numeric(format!("user {}: {e}", row.user_id))
                        })?;
                    series.push(point.f);
                }
                per_user.push(series);
            }
        }
        TrajectoryMode::Ode => {
            if dt.is_nan() || dt <= 0.0 || dt > 1.0 {
                return Err(CliError::Input(format!(
                    "dt must be in (0, 1], got {dt}"
                )));
            }
            let steps_per_period = (1.0 / dt).round().max(1.0) as usize;
            let dt_actual = 1.0 / steps_per_period as f64;
            ctx.config("dt", dt_actual);
            for row in &rows {
                if row.state.f0 > params.n {
                    return Err(CliError::Input(format!(
                        "user {}: f0 {} exceeds population {}",
                        row.user_id, row.state.f0, params.n
                    )));
                }
                let points =
                    follower_trajectory_ode(&params, &row.state, horizon as f64, dt_actual)
                        .map_err(|e| {
                            CliError::Numeric(format!("user {}: {e}", row.user_id))
                        })?;
                // Fixed steps divide each period exactly; pick the whole ones.
                let series: Vec<f64> = (0..=horizon)
                    .map(|t| points[t as usize * steps_per_period].f)
                    .collect();
                per_user.push(series);
            }
        }
    }

    let mut trajectories = String::from("user,t,f\n");
    for (row, series) in rows.iter().zip(&per_user) {
        for (t, f) in series.iter().enumerate() {
            trajectories.push_str(&format!("{},{t},{}\n", row.user_id, fmt_f64(*f)));
        }
    }

    // Gini of the predicted counts across users at each period; the raw
    // closed form can dip below zero, which is clamped for the summary.
    let mut gini_csv = String::from("t,gini\n");
    for t in 0..=horizon as usize {
        let values: Vec<f64> = per_user.iter().map(|s| s[t].max(0.0)).collect();
        let sample = ValueSample::new(values).map_err(CliError::from)?;
        let g = gini(&sample)
            .map_err(CliError::from)
            .map_err(|e| match e {
                CliError::Degenerate(m) => CliError::Degenerate(format!("t = {t}: {m}")),
                other => other,
            })?;
        gini_csv.push_str(&format!("{t},{}\n", fmt_f64(g)));
    }

    ctx.stage("trajectories.csv", trajectories);
    ctx.stage("predicted_gini.csv", gini_csv);
    ctx.flush()
}
