//! Synchronous round loop and the single-trial runner.
//!
//! Round `r` (1-based) runs in five phases:
//!
//! 1. every agent selects an arm from its statistics after `r - 1` rounds;
//! 2. every pull draws an independent reward, even when agents share an arm;
//! 3. each agent records its own pull;
//! 4. agents whose protocol says so broadcast `(arm, reward)` to neighbors;
//! 5. recipients record what they received.
//!
//! Receipts from round `r` are therefore visible from round `r + 1` on.

use rand_chacha::ChaCha8Rng;

use crate::agent::AgentState;
use crate::model::SimConfig;
use crate::policy::{select_arm, PolicyParams};
use crate::protocol::{deliveries, should_broadcast, BroadcastMessage};
use crate::rng::{substream, StreamPurpose};

/// Random streams owned by one agent for the lifetime of a trial.
#[derive(Debug, Clone)]
pub struct AgentStreams {
    pub reward: ChaCha8Rng,
    pub tie_break: ChaCha8Rng,
}

impl AgentStreams {
    pub fn for_agent(trial_seed: u64, agent: usize) -> Self {
        Self {
            reward: substream(trial_seed, agent, StreamPurpose::Reward),
            tie_break: substream(trial_seed, agent, StreamPurpose::TieBreak),
        }
    }
}

/// What happened in one round, indexed by agent.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub choices: Vec<usize>,
    pub exploring: Vec<bool>,
    pub broadcasting: Vec<bool>,
    pub rewards: Vec<f64>,
    /// Total point-to-point deliveries made this round.
    pub deliveries: usize,
}

impl RoundRecord {
    /// Broadcast events this round; the per-round communication cost.
    pub fn broadcasts(&self) -> usize {
        self.broadcasting.iter().filter(|&&b| b).count()
    }
}

/// Runs round `round` over all agents. Panics if `round` is outside
/// `1..=horizon` or the slices do not hold one entry per agent.
pub fn run_round(
    states: &mut [AgentState],
    round: usize,
    config: &SimConfig,
    params: &PolicyParams,
    streams: &mut [AgentStreams],
) -> RoundRecord {
    let agents = config.agent_count();
    assert!(
        (1..=config.horizon()).contains(&round),
        "round {round} outside 1..={}",
        config.horizon()
    );
    assert_eq!(states.len(), agents);
    assert_eq!(streams.len(), agents);

    let t = (round - 1) as u64;
    let model = config.model();
    let protocol = config.protocol();

    let mut choices = Vec::with_capacity(agents);
    let mut exploring = Vec::with_capacity(agents);
    for (state, s) in states.iter().zip(streams.iter_mut()) {
        let sel = select_arm(state, t, params, &mut s.tie_break);
        choices.push(sel.arm);
        exploring.push(sel.exploring);
    }

    let rewards: Vec<f64> = choices
        .iter()
        .zip(streams.iter_mut())
        .map(|(&arm, s)| model.sample(arm, &mut s.reward))
        .collect();

    for ((state, &arm), &reward) in states.iter_mut().zip(&choices).zip(&rewards) {
        state.record_own_pull(arm, reward);
    }

    let broadcasting: Vec<bool> = exploring
        .iter()
        .map(|&e| should_broadcast(protocol, e))
        .collect();

    let mut delivered = 0;
    for sender in (0..agents).filter(|&k| broadcasting[k]) {
        let msg = BroadcastMessage {
            sender,
            arm: choices[sender],
            reward: rewards[sender],
        };
        for d in deliveries(config.graph(), &msg) {
            states[d.recipient].record_received(d.arm, d.reward);
            delivered += 1;
        }
    }

    RoundRecord {
        round,
        choices,
        exploring,
        broadcasting,
        rewards,
        deliveries: delivered,
    }
}

/// Output of one seeded trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    /// Group cumulative regret after each round, `R(1..=T)`.
    pub regret: Vec<f64>,
    /// Group cumulative broadcast count after each round, `L(1..=T)`.
    pub comm_cost: Vec<u64>,
    /// Final own-pull counts, `pull_counts[agent][arm]`.
    pub pull_counts: Vec<Vec<u64>>,
    /// Final observation counts, `observation_counts[agent][arm]`.
    pub observation_counts: Vec<Vec<u64>>,
}

impl TrialResult {
    pub fn horizon(&self) -> usize {
        self.regret.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_cost(&self) -> u64 {
        self.comm_cost.last().copied().unwrap_or(0)
    }
}

/// A trial in progress, stepped one round at a time.
#[derive(Debug, Clone)]
pub struct Trial<'a> {
    config: &'a SimConfig,
    params: PolicyParams,
    gaps: Vec<f64>,
    states: Vec<AgentState>,
    streams: Vec<AgentStreams>,
    seed: u64,
    round: usize,
    regret: f64,
    cost: u64,
}

impl<'a> Trial<'a> {
    pub fn new(config: &'a SimConfig, trial_seed: u64) -> Self {
        let model = config.model();
        let params = PolicyParams::new(config.xi(), model.sigmas())
            .expect("SimConfig and RewardModel validate xi and sigma");
        let states = (0..config.agent_count())
            .map(|k| AgentState::init(model, &mut substream(trial_seed, k, StreamPurpose::Init)))
            .collect();
        let streams = (0..config.agent_count())
            .map(|k| AgentStreams::for_agent(trial_seed, k))
            .collect();
        Self {
            config,
            params,
            gaps: model.gaps(),
            states,
            streams,
            seed: trial_seed,
            round: 0,
            regret: 0.0,
            cost: 0,
        }
    }

    pub fn states(&self) -> &[AgentState] {
        &self.states
    }

    pub fn rounds_completed(&self) -> usize {
        self.round
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.config.horizon()
    }

    pub fn cumulative_regret(&self) -> f64 {
        self.regret
    }

    pub fn cumulative_cost(&self) -> u64 {
        self.cost
    }

    pub fn step(&mut self) -> RoundRecord {
        self.round += 1;
        let record = run_round(
            &mut self.states,
            self.round,
            self.config,
            &self.params,
            &mut self.streams,
        );
        self.regret += record.choices.iter().map(|&a| self.gaps[a]).sum::<f64>();
        self.cost += record.broadcasts() as u64;
        record
    }

    pub fn finish(mut self) -> TrialResult {
        let remaining = self.config.horizon() - self.round;
        let mut regret = Vec::with_capacity(remaining);
        let mut comm_cost = Vec::with_capacity(remaining);
        while !self.is_finished() {
            self.step();
            regret.push(self.regret);
            comm_cost.push(self.cost);
        }
        TrialResult {
            seed: self.seed,
            regret,
            comm_cost,
            pull_counts: self.states.iter().map(|s| s.own_pulls().to_vec()).collect(),
            observation_counts: self
                .states
                .iter()
                .map(|s| s.observations().to_vec())
                .collect(),
        }
    }
}

/// Runs all `T` rounds. Deterministic in `(config, trial_seed)`.
pub fn run_trial(config: &SimConfig, trial_seed: u64) -> TrialResult {
    Trial::new(config, trial_seed).finish()
}
