//! Seeded agent-based simulation of the attention feedback loop: tweets
//! drive retweets and mentions, which drive follows and unfollows.
//!
//! Per step and per user, attention is synthesized from the proxy models and
//! the follower count moves by binomial draws over the candidate pool
//! (gains) and the current followers (losses). All randomness derives from
//! one 64-bit seed through a documented substream rule, so serial and
//! parallel execution agree bit for bit and every run is reproducible.

use crate::fitting::assign_quintiles;
use crate::inequality::{gini, top_share, ValueSample};
use crate::model::{
    gain_probability, loss_probability, mention_count, retweet_count, AttentionState,
    ModelParams, ProxyParams, Quintile,
};
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution, LogNormal, Pareto};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("bad config: {0}")]
    BadConfig(String),
}

/// Per-step tweet-count distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityModel {
    LogNormal { mu: f64, sigma: f64 },
}

/// Initial follower-count distribution; draws are truncated at `n_users - 1`
/// and rounded down to integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialFollowers {
    Pareto { shape: f64, scale: f64 },
}

/// Full simulation setup. Identical configs (seed included) produce
/// identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_users: u64,
    pub n_steps: u64,
    pub seed: u64,
    /// Model constants per quintile class; all five must be present and
    /// carry `n` equal to `n_users`.
    pub class_params: BTreeMap<Quintile, ModelParams>,
    pub activity_model: ActivityModel,
    pub initial_followers: InitialFollowers,
    /// Synthesizes per-step retweets and mentions from followers and tweets.
    pub proxy: ProxyParams,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_users < 5 {
            return Err(SimError::BadConfig(format!(
                "n_users must be >= 5, got {}",
                self.n_users
            )));
        }
        for q in Quintile::ALL {
            match self.class_params.get(&q) {
                None => {
                    return Err(SimError::BadConfig(format!("missing class_params for {q}")));
                }
                Some(p) if p.n != self.n_users => {
                    return Err(SimError::BadConfig(format!(
                        "class_params for {q} carry n = {} but n_users = {}",
                        p.n, self.n_users
                    )));
                }
                Some(_) => {}
            }
        }
        match self.activity_model {
            ActivityModel::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
                    return Err(SimError::BadConfig(format!(
                        "log_normal activity needs finite mu and sigma >= 0, got mu={mu}, sigma={sigma}"
                    )));
                }
            }
        }
        match self.initial_followers {
            InitialFollowers::Pareto { shape, scale } => {
                if !shape.is_finite() || shape <= 0.0 || !scale.is_finite() || scale <= 0.0 {
                    return Err(SimError::BadConfig(format!(
                        "pareto initial followers need shape > 0 and scale > 0, got shape={shape}, scale={scale}"
                    )));
                }
            }
        }
        // Keep the mention proxy finite over the whole reachable range.
        let max_exponent = self.proxy.b_m * (self.n_users - 1) as f64;
        if !max_exponent.is_finite() || max_exponent > 700.0 {
            return Err(SimError::BadConfig(format!(
                "mention proxy overflows: b_m * (n_users - 1) = {max_exponent}"
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("SimConfig serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig =
            serde_json::from_str(text).map_err(|e| SimError::BadConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Follower concentration summary recorded after every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    pub step: u64,
    pub gini_followers: f64,
    pub top01_share: f64,
    pub top20_share: f64,
    pub mean_followers: f64,
}

/// Evolving simulation state plus the recorded metrics series.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: u64,
    pub followers: Vec<u64>,
    pub class_of: Vec<Quintile>,
    pub total_tweets: f64,
    pub total_retweets: f64,
    pub total_mentions: f64,
    pub metrics_series: Vec<StepMetrics>,
}

/// SplitMix64 finalizer; the mixing stage of the substream rule.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream rule: one generator per (seed, step, user), derived as
/// `splitmix64(splitmix64(splitmix64(seed) ^ step) ^ user)`. Step 0 is the
/// initialization draw; simulation steps are 1-based.
pub fn substream_seed(seed: u64, step: u64, user: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ step) ^ user)
}

fn record_metrics(state: &mut SimState) {
    let values: Vec<f64> = state.followers.iter().map(|&f| f as f64).collect();
    let n = values.len() as f64;
    let mean_followers = values.iter().sum::<f64>() / n;
    let sample = ValueSample::new(values).expect("follower counts are nonnegative");
    // An all-zero population has no defined concentration; report zeros
    // rather than failing the run.
    let (g, top01, top20) = if mean_followers > 0.0 {
        (
            gini(&sample).expect("nonempty, positive mean"),
            top_share(&sample, 0.01).expect("valid fraction"),
            top_share(&sample, 0.20).expect("valid fraction"),
        )
    } else {
        (0.0, 0.0, 0.0)
    };
    state.metrics_series.push(StepMetrics {
        step: state.step,
        gini_followers: g,
        top01_share: top01,
        top20_share: top20,
        mean_followers,
    });
}

/// Draws the initial population and assigns quintile classes by ranking the
/// initial follower counts exactly as [`assign_quintiles`] does.
pub fn init_population(cfg: &SimConfig) -> Result<SimState, SimError> {
    cfg.validate()?;
    let cap = cfg.n_users - 1;
    let mut followers = Vec::with_capacity(cfg.n_users as usize);
    match cfg.initial_followers {
        InitialFollowers::Pareto { shape, scale } => {
            let dist = Pareto::new(scale, shape)
                .map_err(|e| SimError::BadConfig(format!("pareto: {e}")))?;
            for user in 0..cfg.n_users {
                let mut rng = Pcg64::seed_from_u64(substream_seed(cfg.seed, 0, user));
                let draw: f64 = dist.sample(&mut rng);
                followers.push((draw.floor() as u64).min(cap));
            }
        }
    }
    let ranked: Vec<(u64, u64, u64)> = followers
        .iter()
        .enumerate()
        .map(|(i, &f)| (i as u64, f, 0))
        .collect();
    let table = assign_quintiles(&ranked).map_err(|e| SimError::BadConfig(e.to_string()))?;
    let mut class_of = vec![Quintile::Q1; cfg.n_users as usize];
    for group in &table.groups {
        for &member in &group.members {
            class_of[member as usize] = group.label;
        }
    }
    let mut state = SimState {
        step: 0,
        followers,
        class_of,
        total_tweets: 0.0,
        total_retweets: 0.0,
        total_mentions: 0.0,
        metrics_series: Vec::with_capacity(cfg.n_steps as usize + 1),
    };
    record_metrics(&mut state);
    Ok(state)
}

struct UserStep {
    f_next: u64,
    tweets: f64,
    retweets: f64,
    mentions: f64,
    gains: u64,
    losses: u64,
}

fn user_step(cfg: &SimConfig, params: &ModelParams, step: u64, user: u64, f: u64) -> UserStep {
    let mut rng = Pcg64::seed_from_u64(substream_seed(cfg.seed, step, user));
    let tweets = match cfg.activity_model {
        ActivityModel::LogNormal { mu, sigma } => {
            LogNormal::new(mu, sigma).expect("validated").sample(&mut rng)
        }
    };
    let retweets = retweet_count(&cfg.proxy, f as f64, tweets);
    let mentions = mention_count(&cfg.proxy, f as f64).expect("bounded by config validation");
    let state = AttentionState {
        f0: f,
        r: retweets,
        m: mentions,
        p: tweets,
    };
    let p_gain = gain_probability(params, &state);
    let p_loss = loss_probability(params, &state);

    // Self-follow is excluded: the candidate pool is N - 1 - f.
    let pool = cfg.n_users - 1 - f;
    let gains = if pool > 0 && p_gain > 0.0 {
        Binomial::new(pool, p_gain).expect("p in [0,1]").sample(&mut rng)
    } else {
        0
    };
    let losses = if f > 0 && p_loss > 0.0 {
        Binomial::new(f, p_loss).expect("p in [0,1]").sample(&mut rng)
    } else {
        0
    };
    UserStep {
        f_next: f + gains - losses,
        tweets,
        retweets,
        mentions,
        gains,
        losses,
    }
}

/// Advances the state by one step. Each user's update depends only on its
/// own substream and follower count, so per-user evaluation order does not
/// affect the outcome.
pub fn step(state: &mut SimState, cfg: &SimConfig) {
    let next_step = state.step + 1;
    for user in 0..cfg.n_users {
        let idx = user as usize;
        let params = &cfg.class_params[&state.class_of[idx]];
        let outcome = user_step(cfg, params, next_step, user, state.followers[idx]);
        debug_assert!(outcome.f_next < cfg.n_users);
        debug_assert!(outcome.gains <= cfg.n_users - 1 - state.followers[idx]);
        debug_assert!(outcome.losses <= state.followers[idx]);
        state.followers[idx] = outcome.f_next;
        state.total_tweets += outcome.tweets;
        state.total_retweets += outcome.retweets;
        state.total_mentions += outcome.mentions;
    }
    state.step = next_step;
    record_metrics(state);
}

/// Runs the full simulation: init, then `n_steps` steps, recording metrics
/// after each. Deterministic for a fixed config.
pub fn run(cfg: &SimConfig) -> Result<SimState, SimError> {
    let mut state = init_population(cfg)?;
    for _ in 0..cfg.n_steps {
        step(&mut state, cfg);
    }
    Ok(state)
}

/// CSV serialization of the metrics series, one row per recorded step.
pub fn write_metrics_csv(series: &[StepMetrics]) -> String {
    let mut out = String::from("step,gini_followers,top01_share,top20_share,mean_f\n");
    for m in series {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            m.step,
            crate::textfmt::fmt_f64(m.gini_followers),
            crate::textfmt::fmt_f64(m.top01_share),
            crate::textfmt::fmt_f64(m.top20_share),
            crate::textfmt::fmt_f64(m.mean_followers),
        ));
    }
    out
}

/// CSV serialization of the final per-user state.
pub fn write_users_csv(state: &SimState) -> String {
    let mut out = String::from("user,f,class\n");
    for (i, (&f, class)) in state.followers.iter().zip(&state.class_of).enumerate() {
        out.push_str(&format!("{i},{f},{class}\n"));
    }
    out
}

/// The reference setup exercised by the test suite and shipped as an example
/// config: 2000 users for 50 steps, every class using the bundled Q1
/// constants, heavy-tailed initial followers, and proxies tuned so gains
/// compound with popularity while losses bite hardest at low attention.
pub fn reference_config(seed: u64) -> SimConfig {
    let n_users = 2000;
    let mut class_params = BTreeMap::new();
    for q in Quintile::ALL {
        let mut params = crate::model::presets::q1(n_users);
        params.quintile_label = q;
        class_params.insert(q, params);
    }
    SimConfig {
        n_users,
        n_steps: 50,
        seed,
        class_params,
        activity_model: ActivityModel::LogNormal {
            mu: 1.0,
            sigma: 1.0,
        },
        initial_followers: InitialFollowers::Pareto {
            shape: 1.5,
            scale: 5.0,
        },
        proxy: ProxyParams {
            a: 1e-5,
            b: 2.0,
            c: 1e-5,
            d: 1.0,
            a_m: 0.01,
            b_m: 0.004,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(seed: u64) -> SimConfig {
        let mut cfg = reference_config(seed);
        cfg.n_users = 200;
        cfg.n_steps = 10;
        for params in cfg.class_params.values_mut() {
            params.n = 200;
        }
        cfg
    }

    #[test]
    fn same_seed_same_population() {
        let cfg = small_config(42);
        let a = init_population(&cfg).unwrap();
        let b = init_population(&cfg).unwrap();
        assert_eq!(a.followers, b.followers);
        assert_eq!(a.class_of, b.class_of);
    }

    #[test]
    fn ten_users_split_two_per_class() {
        let mut cfg = small_config(1);
        cfg.n_users = 10;
        for params in cfg.class_params.values_mut() {
            params.n = 10;
        }
        let state = init_population(&cfg).unwrap();
        for q in Quintile::ALL {
            let count = state.class_of.iter().filter(|&&c| c == q).count();
            assert_eq!(count, 2, "class {q}");
        }
    }

    #[test]
    fn heavy_tailed_init_concentrates_followers() {
        // Direct sampling oracle: the drawn sample itself must show a
        // top-20% share of at least 0.7.
        let mut cfg = reference_config(7);
        cfg.n_users = 10_000;
        cfg.initial_followers = InitialFollowers::Pareto {
            shape: 1.16,
            scale: 10.0,
        };
        for params in cfg.class_params.values_mut() {
            params.n = 10_000;
        }
        let state = init_population(&cfg).unwrap();
        let sample = ValueSample::new(state.followers.iter().map(|&f| f as f64).collect()).unwrap();
        let share = top_share(&sample, 0.20).unwrap();
        assert!(share >= 0.7, "top-20% share {share}");
    }

    #[test]
    fn zero_weights_freeze_the_follower_vector() {
        let mut cfg = small_config(3);
        for params in cfg.class_params.values_mut() {
            params.w1 = 0.0;
            params.w2 = 0.0;
            params.w3 = 0.0;
        }
        let initial = init_population(&cfg).unwrap().followers;
        let state = run(&cfg).unwrap();
        assert_eq!(state.followers, initial);
        let first = state.metrics_series[0].gini_followers;
        for m in &state.metrics_series {
            assert_eq!(m.gini_followers, first);
        }
    }

    #[test]
    fn full_user_cannot_gain() {
        let cfg = small_config(5);
        let params = &cfg.class_params[&Quintile::Q1];
        for step in 1..50 {
            let outcome = user_step(&cfg, params, step, 0, cfg.n_users - 1);
            assert_eq!(outcome.gains, 0);
        }
    }

    #[test]
    fn followers_stay_in_bounds() {
        let cfg = small_config(9);
        let state = run(&cfg).unwrap();
        for &f in &state.followers {
            assert!(f < cfg.n_users);
        }
    }

    #[test]
    fn zero_steps_record_only_the_initial_report() {
        let mut cfg = small_config(11);
        cfg.n_steps = 0;
        let state = run(&cfg).unwrap();
        assert_eq!(state.metrics_series.len(), 1);
        assert_eq!(state.metrics_series[0].step, 0);
    }

    #[test]
    fn runs_are_bit_identical_for_the_same_seed() {
        let cfg = small_config(13);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            write_metrics_csv(&a.metrics_series),
            write_metrics_csv(&b.metrics_series)
        );
    }

    #[test]
    fn different_seeds_differ() {
        let a = run(&small_config(1)).unwrap();
        let b = run(&small_config(2)).unwrap();
        assert_ne!(a.followers, b.followers);
    }

    #[test]
    fn mean_gains_match_the_binomial_expectation() {
        // Monte-Carlo oracle: replicate one user's step across many distinct
        // substreams and compare the mean gain with (N-1-f) * P+.
        let cfg = small_config(17);
        let params = &cfg.class_params[&Quintile::Q1];
        let f = 100u64;
        let replications = 10_000u64;
        let mut total_gains = 0u64;
        let mut p_gain = 0.0;
        for step in 1..=replications {
            let mut rng = Pcg64::seed_from_u64(substream_seed(cfg.seed, step, 0));
            let tweets = match cfg.activity_model {
                ActivityModel::LogNormal { mu, sigma } => {
                    LogNormal::new(mu, sigma).unwrap().sample(&mut rng)
                }
            };
            let r = retweet_count(&cfg.proxy, f as f64, tweets);
            let m = mention_count(&cfg.proxy, f as f64).unwrap();
            p_gain = gain_probability(
                params,
                &AttentionState {
                    f0: f,
                    r,
                    m,
                    p: tweets,
                },
            );
            let outcome = user_step(&cfg, params, step, 0, f);
            total_gains += outcome.gains;
        }
        // The tweet draw varies per replication, so compare against the
        // pooled expectation using the last P+ as a scale reference for the
        // tolerance and the empirical mean of expectations for the target.
        let pool = (cfg.n_users - 1 - f) as f64;
        let mut expected_sum = 0.0;
        for step in 1..=replications {
            let mut rng = Pcg64::seed_from_u64(substream_seed(cfg.seed, step, 0));
            let tweets = match cfg.activity_model {
                ActivityModel::LogNormal { mu, sigma } => {
                    LogNormal::new(mu, sigma).unwrap().sample(&mut rng)
                }
            };
            let r = retweet_count(&cfg.proxy, f as f64, tweets);
            let m = mention_count(&cfg.proxy, f as f64).unwrap();
            let p = gain_probability(
                params,
                &AttentionState {
                    f0: f,
                    r,
                    m,
                    p: tweets,
                },
            );
            expected_sum += pool * p;
        }
        let mean_gain = total_gains as f64 / replications as f64;
        let expected = expected_sum / replications as f64;
        let se = (pool * p_gain.max(1e-6) / replications as f64).sqrt().max(1e-4);
        assert!(
            (mean_gain - expected).abs() <= 3.0 * se.max(expected * 0.05),
            "mean {mean_gain}, expected {expected}"
        );
    }

    #[test]
    fn raising_w1_does_not_reduce_expected_growth() {
        let seeds: Vec<u64> = (1..=20).collect();
        let mean_final = |w1: f64| -> f64 {
            let mut total = 0.0;
            for &seed in &seeds {
                let mut cfg = small_config(seed);
                cfg.n_steps = 15;
                for params in cfg.class_params.values_mut() {
                    params.w1 = w1;
                }
                let state = run(&cfg).unwrap();
                total += state.metrics_series.last().unwrap().mean_followers;
            }
            total / seeds.len() as f64
        };
        let low = mean_final(0.00215);
        let high = mean_final(0.00645);
        assert!(high >= low, "low {low}, high {high}");
    }

    #[test]
    fn config_json_round_trips_and_validates() {
        let cfg = reference_config(99);
        let json = cfg.to_json();
        let back = SimConfig::from_json(&json).unwrap();
        assert_eq!(back, cfg);

        let mut broken = cfg.clone();
        broken.class_params.remove(&Quintile::Q3);
        assert!(broken.validate().is_err());
        let err = SimConfig::from_json(&broken.to_json()).unwrap_err();
        assert!(matches!(err, SimError::BadConfig(_)));
    }

    #[test]
    fn mismatched_population_in_class_params_is_rejected() {
        let mut cfg = reference_config(1);
        cfg.class_params.get_mut(&Quintile::Q2).unwrap().n = 7;
        assert!(cfg.validate().is_err());
    }
}
