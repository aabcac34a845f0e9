//! Quintile stratification and regression estimation of model and proxy
//! parameters from windowed observations.
//!
//! Every fitter is deterministic: a fixed exponent grid with exact
//! nonnegative least squares for the linear weights, followed by a
//! Nelder-Mead polish capped at 500 iterations with a 1e-9 RMSE tolerance.
//! There are no randomized restarts, so identical input always produces
//! identical output.

use crate::ingest::{empirical_transition_probs, UserWindow};
use crate::model::{ModelParams, ProxyParams, Quintile, LOSS_RETWEET_FLOOR};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("length mismatch: {left} predicted vs {right} actual")]
    LengthMismatch { left: usize, right: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("need at least 5 users to form quintiles, got {0}")]
    TooFewUsers(usize),
}

const MIN_SAMPLES: usize = 20;
const GRID_LO: f64 = 0.0;
const GRID_HI: f64 = 2.0;
const GRID_STEP: f64 = 0.05;
const LOSS_GRID_LO: f64 = -2.0;
const LOSS_GRID_HI: f64 = 2.0;
const POLISH_MAX_ITER: usize = 500;
const POLISH_TOL: f64 = 1e-9;

/// One empirical gain observation: attention received and the measured
/// per-candidate follow probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample {
    pub r: f64,
    pub m: f64,
    pub p_plus: f64,
}

/// One empirical loss observation (`r >= 1`; callers floor raw retweet
/// counts the same way the loss probability does).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSample {
    pub r: f64,
    pub p_minus: f64,
}

/// Fitted gain-side constants of [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainParams {
    pub alpha: f64,
    pub beta: f64,
    pub w1: f64,
    pub w2: f64,
}

/// Fitted loss-side constants of [`ModelParams`]. `w3` keeps its sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub theta: f64,
    pub w3: f64,
}

/// A fit result: the parameters plus goodness-of-fit bookkeeping.
/// `converged` is false when the polish hit its iteration cap; the best
/// parameters found so far are still returned.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome<P> {
    pub params: P,
    pub rmse: f64,
    pub n_samples: usize,
    pub converged: bool,
}

/// Per-model statistics of a proxy fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitStats {
    pub rmse: f64,
    pub n_samples: usize,
    pub converged: bool,
}

/// Both proxy models fitted from the same windows.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxyFit {
    pub params: ProxyParams,
    pub retweet: FitStats,
    pub mention: FitStats,
    /// Windows with zero mentions, excluded from the mention regression.
    pub mention_zero_excluded: usize,
}

/// One quintile of users ranked by follower count.
#[derive(Debug, Clone, PartialEq)]
pub struct QuintileGroup<I> {
    pub label: Quintile,
    /// Member ids in rank order (most followed first).
    pub members: Vec<I>,
    pub mean_followers: f64,
    pub mean_statuses: f64,
}

/// The five quintiles; a partition of the input users.
#[derive(Debug, Clone, PartialEq)]
pub struct QuintileTable<I> {
    pub groups: Vec<QuintileGroup<I>>,
}

impl<I: Clone + PartialEq> QuintileTable<I> {
    pub fn group(&self, label: Quintile) -> &QuintileGroup<I> {
        &self.groups[label.index()]
    }

    pub fn quintile_of(&self, id: &I) -> Option<Quintile> {
        for group in &self.groups {
            if group.members.contains(id) {
                return Some(group.label);
            }
        }
        None
    }
}

/// Ranks users by follower count (descending, ties broken by ascending id)
/// and splits them into five near-equal groups; group sizes differ by at
/// most one, with the extra members going to the top quintiles.
pub fn assign_quintiles<I: Clone + Ord>(
    users: &[(I, u64, u64)],
) -> Result<QuintileTable<I>, FitError> {
    if users.len() < 5 {
        return Err(FitError::TooFewUsers(users.len()));
    }
    let mut ranked: Vec<&(I, u64, u64)> = users.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let n = ranked.len();
    let base = n / 5;
    let extra = n % 5;
    let mut groups = Vec::with_capacity(5);
    let mut cursor = 0;
    for (idx, label) in Quintile::ALL.into_iter().enumerate() {
        let size = base + usize::from(idx < extra);
        let slice = &ranked[cursor..cursor + size];
        cursor += size;
        let mean_followers = slice.iter().map(|u| u.1 as f64).sum::<f64>() / size as f64;
        let mean_statuses = slice.iter().map(|u| u.2 as f64).sum::<f64>() / size as f64;
        groups.push(QuintileGroup {
            label,
            members: slice.iter().map(|u| u.0.clone()).collect(),
            mean_followers,
            mean_statuses,
        });
    }
    Ok(QuintileTable { groups })
}

/// Root mean squared error between two equal-length series.
pub fn evaluate_rmse(predicted: &[f64], actual: &[f64]) -> Result<f64, FitError> {
    if predicted.len() != actual.len() {
        return Err(FitError::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(FitError::EmptyInput);
    }
    let sse: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

// ---------------------------------------------------------------------------
// Two-variable nonnegative least squares
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Nnls2 {
    w1: f64,
    w2: f64,
    sse: f64,
}

/// Exact nonnegative least squares for `y ~ w1 c1 + w2 c2` given the Gram
/// sums. For two variables the optimum is one of: the unconstrained solution
/// (when both weights are nonnegative), either single-column solution, or
/// zero. Candidates are evaluated in that fixed order and strict improvement
/// is required, so ties resolve deterministically.
fn nnls2(s11: f64, s12: f64, s22: f64, b1: f64, b2: f64, syy: f64) -> Nnls2 {
    let sse_of = |w1: f64, w2: f64| {
        (syy - 2.0 * (w1 * b1 + w2 * b2)
            + w1 * w1 * s11
            + 2.0 * w1 * w2 * s12
            + w2 * w2 * s22)
            .max(0.0)
    };
    let mut candidates: Vec<(f64, f64)> = Vec::with_capacity(4);
    let det = s11 * s22 - s12 * s12;
    if det > 1e-300 {
        let w1 = (s22 * b1 - s12 * b2) / det;
        let w2 = (s11 * b2 - s12 * b1) / det;
        if w1 >= 0.0 && w2 >= 0.0 {
            candidates.push((w1, w2));
        }
    }
    if s11 > 0.0 {
        candidates.push(((b1 / s11).max(0.0), 0.0));
    }
    if s22 > 0.0 {
        candidates.push((0.0, (b2 / s22).max(0.0)));
    }
    candidates.push((0.0, 0.0));

    let mut best = Nnls2 {
        w1: 0.0,
        w2: 0.0,
        sse: f64::INFINITY,
    };
    for (w1, w2) in candidates {
        let sse = sse_of(w1, w2);
        if sse < best.sse {
            best = Nnls2 { w1, w2, sse };
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Nelder-Mead polish
// ---------------------------------------------------------------------------

struct PolishResult {
    x: Vec<f64>,
    value: f64,
    converged: bool,
    iterations: usize,
}

/// Deterministic Nelder-Mead polish with restarts. Each inner run stops when
/// the simplex value spread falls under `tol`; a fresh simplex is then spun
/// up at the best point (escaping directional collapse) until a restart
/// yields no material improvement or the shared iteration cap runs out.
fn polished_minimum<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    x0: &[f64],
    step: f64,
    lo: &[f64],
    hi: &[f64],
    max_iter: usize,
    tol: f64,
) -> PolishResult {
    let mut best = PolishResult {
        x: x0.to_vec(),
        value: f64::INFINITY,
        converged: false,
        iterations: 0,
    };
    let mut remaining = max_iter;
    loop {
        let run = nelder_mead(&mut objective, &best.x, step, lo, hi, remaining, tol);
        remaining = remaining.saturating_sub(run.iterations.max(1));
        let improved = run.value < best.value - tol;
        if run.value < best.value {
            best.x = run.x;
            best.value = run.value;
        }
        best.converged = run.converged;
        if !run.converged || remaining == 0 || !improved {
            break;
        }
    }
    best
}

/// Minimal deterministic Nelder-Mead over a clamped box. The starting
/// simplex is `x0` plus one step along each axis; termination is on the
/// value spread of the simplex or the iteration cap.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    x0: &[f64],
    step: f64,
    lo: &[f64],
    hi: &[f64],
    max_iter: usize,
    tol: f64,
) -> PolishResult {
    let dim = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..dim {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut first = x0.to_vec();
    clamp(&mut first);
    let value = objective(&first);
    simplex.push((first.clone(), value));
    for i in 0..dim {
        let mut point = first.clone();
        // Step toward the interior when the start sits on the upper bound.
        point[i] = if point[i] + step <= hi[i] {
            point[i] + step
        } else {
            point[i] - step
        };
        clamp(&mut point);
        let value = objective(&point);
        simplex.push((point, value));
    }

    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[dim].1 - simplex[0].1 <= tol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; dim];
        for point in &simplex[..dim] {
            for (slot, &coord) in centroid.iter_mut().zip(&point.0) {
                *slot += coord / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let mut reflected: Vec<f64> = (0..dim)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        clamp(&mut reflected);
        let reflected_value = objective(&reflected);

        if reflected_value < simplex[0].1 {
            let mut expanded: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            clamp(&mut expanded);
            let expanded_value = objective(&expanded);
            simplex[dim] = if expanded_value < reflected_value {
                (expanded, expanded_value)
            } else {
                (reflected, reflected_value)
            };
        } else if reflected_value < simplex[dim - 1].1 {
            simplex[dim] = (reflected, reflected_value);
        } else {
            let outside = reflected_value < worst.1;
            let toward = if outside { &reflected } else { &worst.0 };
            let mut contracted: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + 0.5 * (toward[i] - centroid[i]))
                .collect();
            clamp(&mut contracted);
            let contracted_value = objective(&contracted);
            if contracted_value < worst.1.min(reflected_value) {
                simplex[dim] = (contracted, contracted_value);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for point in simplex.iter_mut().skip(1) {
                    for (coord, &anchor) in point.0.iter_mut().zip(&best) {
                        *coord = anchor + 0.5 * (*coord - anchor);
                    }
                    point.1 = objective(&point.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    PolishResult {
        x: simplex[0].0.clone(),
        value: simplex[0].1,
        converged,
        iterations,
    }
}

// ---------------------------------------------------------------------------
// Shared two-term power-law fit: y ~ w1 u^e1 + w2 v^e2, weights >= 0
// ---------------------------------------------------------------------------

/// Result of a two-term power-sum fit `y ~ w1 u^e1 + w2 v^e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSumFit {
    pub w1: f64,
    pub e1: f64,
    pub w2: f64,
    pub e2: f64,
}

fn grid_values() -> Vec<f64> {
    let steps = ((GRID_HI - GRID_LO) / GRID_STEP).round() as usize;
    (0..=steps).map(|i| GRID_LO + i as f64 * GRID_STEP).collect()
}

/// Fits `y ~ w1 u^e1 + w2 v^e2` with nonnegative weights over real-valued
/// observations: exponent grid on [0, 2] with exact two-variable nonnegative
/// least squares per point, then Nelder-Mead polish. This is the engine
/// behind both the gain-probability fit and the retweet proxy fit.
pub fn fit_power_sum(
    u: &[f64],
    v: &[f64],
    y: &[f64],
) -> Result<FitOutcome<PowerSumFit>, FitError> {
    if u.len() != y.len() || v.len() != y.len() {
        return Err(FitError::LengthMismatch {
            left: u.len().max(v.len()),
            right: y.len(),
        });
    }
    if y.len() < MIN_SAMPLES {
        return Err(FitError::InvalidInput(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            y.len()
        )));
    }
    if u.iter().chain(v).any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(FitError::InvalidInput(
            "regressors must be finite and nonnegative".to_string(),
        ));
    }
    let fit = fit_two_term_power(u, v, y)?;
    Ok(FitOutcome {
        params: PowerSumFit {
            w1: fit.w1,
            e1: fit.e1,
            w2: fit.w2,
            e2: fit.e2,
        },
        rmse: fit.rmse,
        n_samples: y.len(),
        converged: fit.converged,
    })
}

struct TwoTermFit {
    e1: f64,
    e2: f64,
    w1: f64,
    w2: f64,
    rmse: f64,
    converged: bool,
}

fn fit_two_term_power(u: &[f64], v: &[f64], y: &[f64]) -> Result<TwoTermFit, FitError> {
    let n = y.len();
    if u.iter().all(|&x| x == 0.0) && v.iter().all(|&x| x == 0.0) {
        return Err(FitError::DegenerateData(
            "all regressors are zero".to_string(),
        ));
    }
    let syy: f64 = y.iter().map(|&x| x * x).sum();
    let grid = grid_values();

    // Precompute power columns and their one-dimensional sums once; the
    // grid search then only needs the cross sums per exponent pair.
    let cols_u: Vec<Vec<f64>> = grid
        .iter()
        .map(|&e| u.iter().map(|&x| x.powf(e)).collect())
        .collect();
    let cols_v: Vec<Vec<f64>> = grid
        .iter()
        .map(|&e| v.iter().map(|&x| x.powf(e)).collect())
        .collect();
    let s11: Vec<f64> = cols_u.iter().map(|c| c.iter().map(|x| x * x).sum()).collect();
    let s22: Vec<f64> = cols_v.iter().map(|c| c.iter().map(|x| x * x).sum()).collect();
    let b1: Vec<f64> = cols_u
        .iter()
        .map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum())
        .collect();
    let b2: Vec<f64> = cols_v
        .iter()
        .map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum())
        .collect();

    let mut best_sse = f64::INFINITY;
    let mut best = (0usize, 0usize, 0.0f64, 0.0f64);
    for (i, cu) in cols_u.iter().enumerate() {
        for (j, cv) in cols_v.iter().enumerate() {
            let s12: f64 = cu.iter().zip(cv).map(|(a, b)| a * b).sum();
            let sol = nnls2(s11[i], s12, s22[j], b1[i], b2[j], syy);
            if sol.sse < best_sse {
                best_sse = sol.sse;
                best = (i, j, sol.w1, sol.w2);
            }
        }
    }

    let objective = |x: &[f64]| -> f64 {
        let (e1, e2) = (x[0], x[1]);
        let cu: Vec<f64> = u.iter().map(|&b| b.powf(e1)).collect();
        let cv: Vec<f64> = v.iter().map(|&b| b.powf(e2)).collect();
        let s11: f64 = cu.iter().map(|x| x * x).sum();
        let s22: f64 = cv.iter().map(|x| x * x).sum();
        let s12: f64 = cu.iter().zip(&cv).map(|(a, b)| a * b).sum();
        let b1: f64 = cu.iter().zip(y).map(|(a, b)| a * b).sum();
        let b2: f64 = cv.iter().zip(y).map(|(a, b)| a * b).sum();
        (nnls2(s11, s12, s22, b1, b2, syy).sse / n as f64).sqrt()
    };
    let start = [grid[best.0], grid[best.1]];
    let polish = polished_minimum(
        objective,
        &start,
        GRID_STEP * 0.5,
        &[GRID_LO, GRID_LO],
        &[GRID_HI, GRID_HI],
        POLISH_MAX_ITER,
        POLISH_TOL,
    );

    let (e1, e2) = (polish.x[0], polish.x[1]);
    let cu: Vec<f64> = u.iter().map(|&b| b.powf(e1)).collect();
    let cv: Vec<f64> = v.iter().map(|&b| b.powf(e2)).collect();
    let s11: f64 = cu.iter().map(|x| x * x).sum();
    let s22: f64 = cv.iter().map(|x| x * x).sum();
    let s12: f64 = cu.iter().zip(&cv).map(|(a, b)| a * b).sum();
    let b1f: f64 = cu.iter().zip(y).map(|(a, b)| a * b).sum();
    let b2f: f64 = cv.iter().zip(y).map(|(a, b)| a * b).sum();
    let weights = nnls2(s11, s12, s22, b1f, b2f, syy);
    Ok(TwoTermFit {
        e1,
        e2,
        w1: weights.w1,
        w2: weights.w2,
        rmse: polish.value,
        converged: polish.converged,
    })
}

/// Fits the gain probability `w1 r^alpha + w2 m^beta` to empirical follow
/// probabilities. Exponents come from the fixed grid plus polish; weights
/// from exact nonnegative least squares, so a term that explains nothing
/// gets weight zero rather than a spurious exponent.
pub fn fit_gain_params(samples: &[GainSample]) -> Result<FitOutcome<GainParams>, FitError> {
    if samples.len() < MIN_SAMPLES {
        return Err(FitError::InvalidInput(format!(
            "need at least {MIN_SAMPLES} gain samples, got {}",
            samples.len()
        )));
    }
    for s in samples {
        if !(0.0..=1.0).contains(&s.p_plus) || s.r < 0.0 || s.m < 0.0 {
            return Err(FitError::InvalidInput(format!(
                "gain sample out of range: r={}, m={}, p_plus={}",
                s.r, s.m, s.p_plus
            )));
        }
    }
    let u: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let v: Vec<f64> = samples.iter().map(|s| s.m).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.p_plus).collect();
    let fit = fit_two_term_power(&u, &v, &y)?;
    Ok(FitOutcome {
        params: GainParams {
            alpha: fit.e1,
            beta: fit.e2,
            w1: fit.w1,
            w2: fit.w2,
        },
        rmse: fit.rmse,
        n_samples: samples.len(),
        converged: fit.converged,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Fits the loss probability `w3 r^(-theta)`.
///
/// When every observation is positive the fit is a closed-form log-log
/// regression (slope `-theta`, intercept `ln w3`). Otherwise a signed grid
/// over theta with per-point linear least squares for `w3`, polished by
/// one-dimensional Nelder-Mead, handles zero or negative observations.
pub fn fit_loss_params(samples: &[LossSample]) -> Result<FitOutcome<LossParams>, FitError> {
    if samples.len() < MIN_SAMPLES {
        return Err(FitError::InvalidInput(format!(
            "need at least {MIN_SAMPLES} loss samples, got {}",
            samples.len()
        )));
    }
    for s in samples {
        if s.r < 1.0 {
            return Err(FitError::InvalidInput(format!(
                "loss samples require r >= 1, got {}",
                s.r
            )));
        }
    }
    let n = samples.len();
    let r: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.p_minus).collect();

    let finish = |theta: f64, w3: f64, converged: bool| {
        let predicted: Vec<f64> = r.iter().map(|&ri| w3 * ri.powf(-theta)).collect();
        let rmse = evaluate_rmse(&predicted, &y).expect("same length");
        FitOutcome {
            params: LossParams { theta, w3 },
            rmse,
            n_samples: n,
            converged,
        }
    };

    if y.iter().all(|&v| v == 0.0) {
        // No losses observed anywhere; the exact fit is the zero function.
        return Ok(finish(0.0, 0.0, true));
    }
    let r_spread = r.iter().any(|&ri| ri != r[0]);
    if !r_spread {
        // Retweet counts are constant; the exponent is unidentifiable and
        // pinned to zero, leaving w3 as the plain least-squares mean.
        return Ok(finish(0.0, mean(&y), true));
    }

    if y.iter().all(|&v| v > 0.0) {
        let lx: Vec<f64> = r.iter().map(|&v| v.ln()).collect();
        let ly: Vec<f64> = y.iter().map(|&v| v.ln()).collect();
        let mx = mean(&lx);
        let my = mean(&ly);
        let var: f64 = lx.iter().map(|&x| (x - mx) * (x - mx)).sum();
        let cov: f64 = lx.iter().zip(&ly).map(|(&x, &yv)| (x - mx) * (yv - my)).sum();
        let slope = cov / var;
        let theta = -slope;
        let w3 = (my - slope * mx).exp();
        return Ok(finish(theta, w3, true));
    }

    // Mixed-sign or zero observations: signed grid plus polish.
    let profile_w3 = |theta: f64| -> f64 {
        let mut gg = 0.0;
        let mut gy = 0.0;
        for (ri, yi) in r.iter().zip(&y) {
            let g = ri.powf(-theta);
            gg += g * g;
            gy += g * yi;
        }
        if gg > 0.0 {
            gy / gg
        } else {
            0.0
        }
    };
    let objective = |x: &[f64]| -> f64 {
        let theta = x[0];
        let w3 = profile_w3(theta);
        let sse: f64 = r
            .iter()
            .zip(&y)
            .map(|(ri, yi)| {
                let e = w3 * ri.powf(-theta) - yi;
                e * e
            })
            .sum();
        (sse / n as f64).sqrt()
    };

    let steps = ((LOSS_GRID_HI - LOSS_GRID_LO) / GRID_STEP).round() as usize;
    let mut best_theta = LOSS_GRID_LO;
    let mut best_value = f64::INFINITY;
    for i in 0..=steps {
        let theta = LOSS_GRID_LO + i as f64 * GRID_STEP;
        let value = objective(&[theta]);
        if value < best_value {
            best_value = value;
            best_theta = theta;
        }
    }
    let polish = polished_minimum(
        objective,
        &[best_theta],
        GRID_STEP * 0.5,
        &[LOSS_GRID_LO],
        &[LOSS_GRID_HI],
        POLISH_MAX_ITER,
        POLISH_TOL,
    );
    let theta = polish.x[0];
    Ok(finish(theta, profile_w3(theta), polish.converged))
}

/// Result of an exponential fit `y ~ scale e^(rate x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFit {
    pub scale: f64,
    pub rate: f64,
}

/// Fits `y ~ scale e^(rate x)` by closed-form linear regression of `ln y`
/// on `x`. Every observation must be strictly positive; callers exclude and
/// count zeros. With no spread in `x` the rate is pinned to zero and the
/// scale is the geometric mean.
pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Result<FitOutcome<ExponentialFit>, FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(FitError::DegenerateData(format!(
            "exponential fit needs at least 2 positive observations, got {}",
            xs.len()
        )));
    }
    if ys.iter().any(|&y| y <= 0.0) {
        return Err(FitError::InvalidInput(
            "exponential fit requires positive observations".to_string(),
        ));
    }
    let ly: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let mx = mean(xs);
    let my = mean(&ly);
    let var: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let (rate, scale) = if var > 0.0 {
        let cov: f64 = xs.iter().zip(&ly).map(|(&x, &y)| (x - mx) * (y - my)).sum();
        let slope = cov / var;
        (slope, (my - slope * mx).exp())
    } else {
        (0.0, my.exp())
    };
    let predicted: Vec<f64> = xs.iter().map(|&x| scale * (rate * x).exp()).collect();
    let rmse = evaluate_rmse(&predicted, ys)?;
    Ok(FitOutcome {
        params: ExponentialFit { scale, rate },
        rmse,
        n_samples: xs.len(),
        converged: true,
    })
}

/// Fits both activity proxies from windowed observations: retweets as
/// `a f^b + c p^d` via [`fit_power_sum`] and mentions as `a_m e^(b_m f)`
/// via [`fit_exponential`] over the windows with m > 0 (the rest are
/// excluded and counted).
pub fn fit_proxy_models(windows: &[UserWindow]) -> Result<ProxyFit, FitError> {
    if windows.len() < MIN_SAMPLES {
        return Err(FitError::InvalidInput(format!(
            "need at least {MIN_SAMPLES} windows, got {}",
            windows.len()
        )));
    }
    let f: Vec<f64> = windows.iter().map(|w| w.f_start as f64).collect();
    let p: Vec<f64> = windows.iter().map(|w| w.p as f64).collect();
    let r: Vec<f64> = windows.iter().map(|w| w.r as f64).collect();
    let retweet_fit = fit_power_sum(&f, &p, &r)?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0usize;
    for w in windows {
        if w.m > 0 {
            xs.push(w.f_start as f64);
            ys.push(w.m as f64);
        } else {
            excluded += 1;
        }
    }
    if xs.len() < 2 {
        return Err(FitError::DegenerateData(format!(
            "mention model needs at least 2 windows with m > 0, got {}",
            xs.len()
        )));
    }
    let mention_fit = fit_exponential(&xs, &ys)?;

    Ok(ProxyFit {
        params: ProxyParams {
            a: retweet_fit.params.w1,
            b: retweet_fit.params.e1,
            c: retweet_fit.params.w2,
            d: retweet_fit.params.e2,
            a_m: mention_fit.params.scale,
            b_m: mention_fit.params.rate,
        },
        retweet: FitStats {
            rmse: retweet_fit.rmse,
            n_samples: windows.len(),
            converged: retweet_fit.converged,
        },
        mention: FitStats {
            rmse: mention_fit.rmse,
            n_samples: mention_fit.n_samples,
            converged: mention_fit.converged,
        },
        mention_zero_excluded: excluded,
    })
}

// ---------------------------------------------------------------------------
// Trajectory constant
// ---------------------------------------------------------------------------

/// Observed follower counts of one user over consecutive periods, with the
/// user's average attention over those periods.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryObs {
    pub f0: f64,
    pub r: f64,
    pub m: f64,
    /// (t, observed followers) at t > 0, in period units.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFit {
    pub c: f64,
    pub rmse: f64,
    pub n_points: usize,
}

/// Fits the trajectory constant by one-dimensional least squares with every
/// other parameter frozen. The closed-form trajectory is linear in the
/// constant through `e^(b t) - e^(k t)`, so the solution is a single ratio
/// of accumulated sums.
pub fn fit_constant_c(
    gain: &GainParams,
    loss: &LossParams,
    n: u64,
    observations: &[TrajectoryObs],
) -> ConstantFit {
    let nf = n as f64;
    let mut gg = 0.0;
    let mut gz = 0.0;
    let mut rows = Vec::new();
    for obs in observations {
        let b = -(weighted(gain.w1, obs.r, gain.alpha) + weighted(gain.w2, obs.m, gain.beta));
        let k = if loss.w3 == 0.0 {
            0.0
        } else {
            loss.w3 * obs.r.max(LOSS_RETWEET_FLOOR).powf(-loss.theta)
        };
        for &(t, f_obs) in &obs.points {
            let g = (b * t).exp() - (k * t).exp();
            let z = f_obs - obs.f0 + b * nf * t;
            gg += g * g;
            gz += g * z;
            rows.push((g, z));
        }
    }
    let c = if gg > 1e-300 { gz / gg } else { 0.0 };
    let n_points = rows.len();
    let rmse = if n_points == 0 {
        0.0
    } else {
        let sse: f64 = rows.iter().map(|(g, z)| (c * g - z) * (c * g - z)).sum();
        (sse / n_points as f64).sqrt()
    };
    ConstantFit { c, rmse, n_points }
}

fn weighted(w: f64, base: f64, exp: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * base.powf(exp)
    }
}

// ---------------------------------------------------------------------------
// Full quintile fit from windows
// ---------------------------------------------------------------------------

/// Everything fitted for one quintile from its pooled user windows.
#[derive(Debug, Clone, PartialEq)]
pub struct QuintileFitReport {
    pub report: FitOutcome<ModelParams>,
    pub gain: FitStats,
    pub loss: FitStats,
    /// Windows skipped because the follow pool was empty (f_start >= N).
    pub skipped_gain_rows: usize,
}

/// Fits a full [`ModelParams`] for one quintile: gain constants from the
/// empirical follow probabilities, loss constants from the unfollow
/// probabilities, and finally the trajectory constant against the observed
/// follower series. The reported RMSE is the trajectory one (follower
/// scale), matching how the parameter table is summarized downstream.
pub fn fit_quintile_params(
    label: Quintile,
    n: u64,
    windows: &[UserWindow],
) -> Result<QuintileFitReport, FitError> {
    let (samples, skipped) = empirical_transition_probs(windows, n);

    let gain_samples: Vec<GainSample> = samples
        .iter()
        .filter_map(|s| {
            s.p_plus.map(|p_plus| GainSample {
                r: s.r,
                m: s.m,
                p_plus,
            })
        })
        .collect();
    let gain = fit_gain_params(&gain_samples)?;

    let loss_samples: Vec<LossSample> = samples
        .iter()
        .map(|s| LossSample {
            r: s.r.max(LOSS_RETWEET_FLOOR),
            p_minus: s.p_minus,
        })
        .collect();
    let loss = fit_loss_params(&loss_samples)?;

    let observations = trajectory_observations(windows);
    let constant = fit_constant_c(&gain.params, &loss.params, n, &observations);

    let params = ModelParams {
        alpha: gain.params.alpha,
        beta: gain.params.beta,
        theta: loss.params.theta,
        w1: gain.params.w1,
        w2: gain.params.w2,
        w3: loss.params.w3,
        c: constant.c,
        n,
        quintile_label: label,
    };
    Ok(QuintileFitReport {
        report: FitOutcome {
            params,
            rmse: constant.rmse,
            n_samples: windows.len(),
            converged: gain.converged && loss.converged,
        },
        gain: FitStats {
            rmse: gain.rmse,
            n_samples: gain.n_samples,
            converged: gain.converged,
        },
        loss: FitStats {
            rmse: loss.rmse,
            n_samples: loss.n_samples,
            converged: loss.converged,
        },
        skipped_gain_rows: skipped,
    })
}

/// Groups windows per user into follower series for the constant fit, using
/// each user's mean attention over its windows as the frozen activity.
pub fn trajectory_observations(windows: &[UserWindow]) -> Vec<TrajectoryObs> {
    use std::collections::BTreeMap;
    let mut per_user: BTreeMap<&str, Vec<&UserWindow>> = BTreeMap::new();
    for w in windows {
        per_user.entry(w.user_id.as_str()).or_default().push(w);
    }
    let mut out = Vec::new();
    for (_, mut rows) in per_user {
        rows.sort_by_key(|w| w.window_index);
        if rows.len() < 2 {
            continue;
        }
        let r = mean(&rows.iter().map(|w| w.r as f64).collect::<Vec<_>>());
        let m = mean(&rows.iter().map(|w| w.m as f64).collect::<Vec<_>>());
        let t0 = rows[0].window_index as f64;
        let f0 = rows[0].f_start as f64;
        let points: Vec<(f64, f64)> = rows[1..]
            .iter()
            .map(|w| (w.window_index as f64 - t0, w.f_start as f64))
            .collect();
        out.push(TrajectoryObs { f0, r, m, points });
    }
    out
}
