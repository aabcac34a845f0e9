//! Follower-dynamics model: gain/loss probabilities, closed-form and
//! numerically integrated follower trajectories, and the retweet/mention
//! proxy models.
//!
//! Two trajectory routes are provided deliberately. The closed form evaluates
//! the printed solution verbatim; the ODE route integrates the underlying
//! rate equation with clamped probabilities. They are distinct models and are
//! never asserted equal anywhere in this crate.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Follower-count quintile label; Q1 is the most-followed 20%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quintile {
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
}

impl Quintile {
    pub const ALL: [Quintile; 5] = [
        Quintile::Q1,
        Quintile::Q2,
        Quintile::Q3,
        Quintile::Q4,
        Quintile::Q5,
    ];

    pub fn index(self) -> usize {
        match self {
            Quintile::Q1 => 0,
            Quintile::Q2 => 1,
            Quintile::Q3 => 2,
            Quintile::Q4 => 3,
            Quintile::Q5 => 4,
        }
    }
}

impl fmt::Display for Quintile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.index() + 1)
    }
}

impl FromStr for Quintile {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Q1" => Ok(Quintile::Q1),
            "Q2" => Ok(Quintile::Q2),
            "Q3" => Ok(Quintile::Q3),
            "Q4" => Ok(Quintile::Q4),
            "Q5" => Ok(Quintile::Q5),
            other => Err(ModelError::Parse {
                line: 0,
                reason: format!("unknown quintile label `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("trajectory value is not finite at t = {t}")]
    NonFiniteResult { t: f64 },
    #[error("integration step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("invalid state: {reason}")]
    InvalidState { reason: String },
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// One quintile's fitted model constants plus the population size `n`.
///
/// Parameter sets with negative `w3` or `c` are valid for trajectory
/// evaluation; probabilities are clamped to [0, 1] at their use sites, never
/// inside the stored values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Retweet exponent of the gain probability.
    pub alpha: f64,
    /// Mention exponent of the gain probability.
    pub beta: f64,
    /// Retweet exponent of the loss probability (applied negated).
    pub theta: f64,
    /// Retweet weight of the gain probability.
    pub w1: f64,
    /// Mention weight of the gain probability.
    pub w2: f64,
    /// Loss-probability coefficient; may be negative.
    pub w3: f64,
    /// Trajectory integration constant; may be negative.
    pub c: f64,
    /// Population size (the pool of potential followers).
    pub n: u64,
    pub quintile_label: Quintile,
}

/// A user's observables at the start of a trajectory: followers at t = 0 and
/// per-period retweets, mentions and tweets, held constant over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionState {
    pub f0: u64,
    pub r: f64,
    pub m: f64,
    pub p: f64,
}

/// Coefficients of the activity proxies: retweets from followers and tweets
/// (`a f^b + c p^d`) and mentions from followers (`a_m e^(b_m f)`).
///
/// The mention coefficients carry the `_m` suffix so one struct can hold both
/// models without a name collision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub a_m: f64,
    pub b_m: f64,
}

/// A point on a follower trajectory. Time is measured in fixed-length
/// observation periods (four days by default elsewhere in the crate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub f: f64,
}

/// Smallest retweet count used inside the loss term; `r^(-theta)` diverges at
/// r = 0 for positive theta, so r is floored at the smallest observable
/// nonzero count.
pub const LOSS_RETWEET_FLOOR: f64 = 1.0;

fn weighted_power(weight: f64, base: f64, exponent: f64) -> f64 {
    // A zero weight must kill the term outright (0 * inf would be NaN).
    if weight == 0.0 {
        0.0
    } else {
        // IEEE pow conventions match the model's: 0^e = 0 for e > 0, 0^0 = 1.
        weight * base.powf(exponent)
    }
}

/// Probability of gaining a follower per candidate per period:
/// `clamp(w1 r^alpha + w2 m^beta, 0, 1)`.
pub fn gain_probability(params: &ModelParams, state: &AttentionState) -> f64 {
    let raw = weighted_power(params.w1, state.r, params.alpha)
        + weighted_power(params.w2, state.m, params.beta);
    raw.clamp(0.0, 1.0)
}

/// Probability of losing a follower per existing follower per period:
/// `clamp(w3 max(r, 1)^(-theta), 0, 1)`.
pub fn loss_probability(params: &ModelParams, state: &AttentionState) -> f64 {
    let r_eff = state.r.max(LOSS_RETWEET_FLOOR);
    weighted_power(params.w3, r_eff, -params.theta).clamp(0.0, 1.0)
}

/// Exponential growth coefficient of the trajectory:
/// `b = -(w1 r^alpha + w2 m^beta)`, the unclamped negated gain rate.
pub fn growth_coefficient(params: &ModelParams, state: &AttentionState) -> f64 {
    -(weighted_power(params.w1, state.r, params.alpha)
        + weighted_power(params.w2, state.m, params.beta))
}

/// Exponent rate of the loss term inside the closed-form trajectory:
/// `w3 max(r, 1)^(-theta)`, unclamped and possibly negative.
pub fn loss_rate(params: &ModelParams, state: &AttentionState) -> f64 {
    let r_eff = state.r.max(LOSS_RETWEET_FLOOR);
    weighted_power(params.w3, r_eff, -params.theta)
}

/// Closed-form follower trajectory:
/// `f(t) = f0 + C e^(b t) - C e^(k t) - b N t`
/// with `b` from [`growth_coefficient`] and `k` from [`loss_rate`].
///
/// The value is returned exactly as the formula produces it; it can leave
/// [0, N] and callers clamp for display if they need to.
pub fn follower_trajectory_closed(
    params: &ModelParams,
    state: &AttentionState,
    t: f64,
) -> Result<TrajectoryPoint, ModelError> {
    if t.is_nan() || t < 0.0 {
        return Err(ModelError::InvalidState {
            reason: format!("trajectory time must be >= 0, got {t}"),
        });
    }
    let b = growth_coefficient(params, state);
    let k = loss_rate(params, state);
    let f = state.f0 as f64 + params.c * (b * t).exp() - params.c * (k * t).exp()
        - b * params.n as f64 * t;
    if !f.is_finite() {
        return Err(ModelError::NonFiniteResult { t });
    }
    Ok(TrajectoryPoint { t, f })
}

/// Fixed-step fourth-order Runge-Kutta integration of the rate equation
/// `df/dt = (N - f) P+ - f P-` with clamped, activity-constant probabilities.
///
/// The returned points include t = 0 and the endpoint. The state stays inside
/// [0, N]: clamped probabilities make the flow point inward at both
/// boundaries, and each step is clamped to absorb integrator overshoot.
pub fn follower_trajectory_ode(
    params: &ModelParams,
    state: &AttentionState,
    t_end: f64,
    dt: f64,
) -> Result<Vec<TrajectoryPoint>, ModelError> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(ModelError::BadStep(dt));
    }
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(ModelError::InvalidState {
            reason: format!("t_end must be finite and >= 0, got {t_end}"),
        });
    }
    let n = params.n as f64;
    if state.f0 as f64 > n {
        return Err(ModelError::InvalidState {
            reason: format!("f0 = {} exceeds population size {}", state.f0, params.n),
        });
    }
    let p_gain = gain_probability(params, state);
    let p_loss = loss_probability(params, state);
    let deriv = |f: f64| (n - f) * p_gain - f * p_loss;

    let mut points = Vec::new();
    let mut t = 0.0;
    let mut f = state.f0 as f64;
    points.push(TrajectoryPoint { t, f });
    while t < t_end {
        let h = dt.min(t_end - t);
        let k1 = deriv(f);
        let k2 = deriv(f + 0.5 * h * k1);
        let k3 = deriv(f + 0.5 * h * k2);
        let k4 = deriv(f + h * k3);
        f += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        f = f.clamp(0.0, n);
        t += h;
        points.push(TrajectoryPoint { t, f });
    }
    Ok(points)
}

/// Retweets received as a function of followers and posting activity:
/// `a f^b + c p^d`.
pub fn retweet_count(proxy: &ProxyParams, f: f64, p: f64) -> f64 {
    debug_assert!(f >= 0.0 && p >= 0.0);
    weighted_power(proxy.a, f, proxy.b) + weighted_power(proxy.c, p, proxy.d)
}

/// Mentions received as a function of followers: `a_m e^(b_m f)`.
pub fn mention_count(proxy: &ProxyParams, f: f64) -> Result<f64, ModelError> {
    debug_assert!(f >= 0.0);
    let m = proxy.a_m * (proxy.b_m * f).exp();
    if m.is_finite() {
        Ok(m)
    } else {
        Err(ModelError::NonFiniteResult { t: f })
    }
}

/// Bundled reference parameter sets for the three most-followed quintiles,
/// used by the example configs and the test suite. The population size is
/// always a caller input; no default is assumed.
pub mod presets {
    use super::{ModelParams, Quintile};

    pub fn q1(n: u64) -> ModelParams {
        ModelParams {
            alpha: 0.634,
            beta: 0.865,
            theta: 0.129,
            w1: 0.00215,
            w2: 0.00038,
            w3: 0.00836,
            c: 8546.0,
            n,
            quintile_label: Quintile::Q1,
        }
    }

    pub fn q2(n: u64) -> ModelParams {
        ModelParams {
            alpha: 1.0145,
            beta: 0.0,
            theta: -0.730,
            w1: 0.0,
            w2: 0.00030,
            w3: -0.00135,
            c: 754.0,
            n,
            quintile_label: Quintile::Q2,
        }
    }

    pub fn q3(n: u64) -> ModelParams {
        ModelParams {
            alpha: 0.448,
            beta: 1.141,
            theta: -0.020,
            w1: 0.00006,
            w2: 0.0,
            w3: -300.0,
            c: -9.0,
            n,
            quintile_label: Quintile::Q3,
        }
    }
}

fn fmt_kv_f64(value: f64) -> String {
    // Shortest representation that parses back to the identical double.
    format!("{value}")
}

impl ModelParams {
    const KV_KEYS: [&'static str; 9] = [
        "quintile_label",
        "n",
        "alpha",
        "beta",
        "theta",
        "w1",
        "w2",
        "w3",
        "c",
    ];

    /// Flat `name=value` serialization, one field per line, fixed order.
    pub fn to_key_value(&self) -> String {
        format!(
            "quintile_label={}\nn={}\nalpha={}\nbeta={}\ntheta={}\nw1={}\nw2={}\nw3={}\nc={}\n",
            self.quintile_label,
            self.n,
            fmt_kv_f64(self.alpha),
            fmt_kv_f64(self.beta),
            fmt_kv_f64(self.theta),
            fmt_kv_f64(self.w1),
            fmt_kv_f64(self.w2),
            fmt_kv_f64(self.w3),
            fmt_kv_f64(self.c),
        )
    }

    pub fn from_key_value(text: &str) -> Result<Self, ModelError> {
        let map = parse_kv_lines(text, &Self::KV_KEYS)?;
        Ok(Self {
            quintile_label: map["quintile_label"].parse()?,
            n: map["n"].parse().map_err(|e| ModelError::Parse {
                line: 0,
                reason: format!("bad n: {e}"),
            })?,
            alpha: kv_f64(&map, "alpha")?,
            beta: kv_f64(&map, "beta")?,
            theta: kv_f64(&map, "theta")?,
            w1: kv_f64(&map, "w1")?,
            w2: kv_f64(&map, "w2")?,
            w3: kv_f64(&map, "w3")?,
            c: kv_f64(&map, "c")?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ModelParams serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            reason: e.to_string(),
        })
    }
}

impl ProxyParams {
    const KV_KEYS: [&'static str; 6] = ["a", "b", "c", "d", "a_m", "b_m"];

    pub fn to_key_value(&self) -> String {
        format!(
            "a={}\nb={}\nc={}\nd={}\na_m={}\nb_m={}\n",
            fmt_kv_f64(self.a),
            fmt_kv_f64(self.b),
            fmt_kv_f64(self.c),
            fmt_kv_f64(self.d),
            fmt_kv_f64(self.a_m),
            fmt_kv_f64(self.b_m),
        )
    }

    pub fn from_key_value(text: &str) -> Result<Self, ModelError> {
        let map = parse_kv_lines(text, &Self::KV_KEYS)?;
        Ok(Self {
            a: kv_f64(&map, "a")?,
            b: kv_f64(&map, "b")?,
            c: kv_f64(&map, "c")?,
            d: kv_f64(&map, "d")?,
            a_m: kv_f64(&map, "a_m")?,
            b_m: kv_f64(&map, "b_m")?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ProxyParams serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            reason: e.to_string(),
        })
    }
}

fn parse_kv_lines<'a>(
    text: &'a str,
    expected: &[&'static str],
) -> Result<std::collections::HashMap<&'static str, &'a str>, ModelError> {
    let mut map = std::collections::HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ModelError::Parse {
            line: line_no,
            reason: format!("expected `name=value`, got `{trimmed}`"),
        })?;
        let key = key.trim();
        let canonical = expected
            .iter()
            .find(|&&k| k == key)
            .ok_or_else(|| ModelError::Parse {
                line: line_no,
                reason: format!("unknown key `{key}`"),
            })?;
        if map.insert(*canonical, value.trim()).is_some() {
            return Err(ModelError::Parse {
                line: line_no,
                reason: format!("duplicate key `{key}`"),
            });
        }
    }
    for &key in expected {
        if !map.contains_key(key) {
            return Err(ModelError::Parse {
                line: 0,
                reason: format!("missing key `{key}`"),
            });
        }
    }
    Ok(map)
}

fn kv_f64(
    map: &std::collections::HashMap<&'static str, &str>,
    key: &'static str,
) -> Result<f64, ModelError> {
    map[key].parse::<f64>().map_err(|e| ModelError::Parse {
        line: 0,
        reason: format!("bad value for `{key}`: {e}"),
    })
}
