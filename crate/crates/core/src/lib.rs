//! Multi-agent stochastic bandits where agents share observations with
//! their graph neighbors under a choice of communication protocols.
//!
//! Each agent runs a UCB rule with a known variance proxy. Under the
//! explore-only protocol an agent broadcasts its `(arm, reward)` pair only
//! on rounds where the UCB choice differs from its highest-estimate arm.
//! The crate simulates these groups, aggregates regret and communication
//! cost over Monte Carlo trials, and fits the cost curve against `ln t`.

pub mod agent;
pub mod config;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;
pub mod montecarlo;
pub mod output;
pub mod policy;
pub mod protocol;
pub mod rng;

pub use agent::AgentState;
pub use engine::{run_round, run_trial, RoundRecord, Trial, TrialResult};
pub use error::{Error, Result};
pub use metrics::{aggregate, linear_fit, log_fit, regret_from_counts, AggregateSeries, Fit};
pub use model::{Arm, NetworkGraph, RewardFamily, RewardModel, SimConfig};
pub use montecarlo::{derive_trial_seed, run_experiment, run_trials, ExperimentPlan};
pub use policy::{confidence_width, select_arm, ucb_index, PolicyParams, Selection};
pub use protocol::{fanout, should_broadcast, BroadcastMessage, Delivery, ProtocolKind};
