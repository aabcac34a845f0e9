//! Attention dynamics of a follower network.
//!
//! The crate models how attention (retweets, mentions) drives follow and
//! unfollow decisions, and everything needed to work with that model
//! end to end:
//!
//! - [`inequality`]: Gini, Lorenz curves, top shares, burstiness, log-binned
//!   histograms.
//! - [`model`]: gain/loss probabilities, closed-form and Runge-Kutta
//!   follower trajectories, retweet/mention proxies, parameter
//!   serialization.
//! - [`fitting`]: quintile stratification and the deterministic
//!   grid-plus-polish regression scheme for every model constant.
//! - [`ingest`]: temporal edge and activity log parsing, replay, and
//!   windowing into per-user observations.
//! - [`sim`]: a seeded agent-based simulator of the feedback loop.
//! - [`synth`]: a calibrated deterministic dataset generator for tests and
//!   demos.

pub mod fitting;
pub mod inequality;
pub mod ingest;
pub mod model;
pub mod sim;
pub mod synth;
pub mod textfmt;

pub use fitting::{
    assign_quintiles, evaluate_rmse, fit_exponential, fit_gain_params, fit_loss_params,
    fit_power_sum, fit_proxy_models, fit_quintile_params, FitError, FitOutcome, QuintileTable,
};
pub use inequality::{
    gini, kurtosis_burstiness, log_bin, lorenz, top_share, ActivitySeries, InequalityReport,
    LorenzCurve, MetricError, ValueSample,
};
pub use ingest::{
    build_windows, empirical_transition_probs, parse_activity_log, parse_snapshot,
    parse_temporal_edges, ActivityRecord, IngestError, SnapshotRow, TemporalEdge, UserWindow,
    WindowingConfig,
};
pub use model::{
    follower_trajectory_closed, follower_trajectory_ode, gain_probability, loss_probability,
    mention_count, retweet_count, AttentionState, ModelError, ModelParams, ProxyParams, Quintile,
    TrajectoryPoint,
};
pub use sim::{SimConfig, SimError, SimState, StepMetrics};
