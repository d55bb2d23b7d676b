//! Per-agent sample statistics and the running mean estimator.
//!
//! The estimate folds the initial sample in as one extra observation:
//! `(S_i + X_i(0)) / (N_i + 1)`. The initial sample is not counted in
//! `own_pulls` or `observations`.

use rand::Rng;

use crate::model::{argmax_lowest, RewardModel};

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    own_pulls: Vec<u64>,
    observations: Vec<u64>,
    reward_sums: Vec<f64>,
    initial: Vec<f64>,
}

impl AgentState {
    /// Draws one initial sample per arm.
    pub fn init<R: Rng + ?Sized>(model: &RewardModel, rng: &mut R) -> Self {
        let initial = (0..model.arm_count())
            .map(|i| model.sample(i, rng))
            .collect();
        Self::from_initial(initial)
    }

    /// State with the given initial samples and no observations.
    pub fn from_initial(initial: Vec<f64>) -> Self {
        let n = initial.len();
        Self {
            own_pulls: vec![0; n],
            observations: vec![0; n],
            reward_sums: vec![0.0; n],
            initial,
        }
    }

    pub fn arm_count(&self) -> usize {
        self.initial.len()
    }

    pub fn estimate(&self, i: usize) -> f64 {
        (self.reward_sums[i] + self.initial[i]) / (self.observations[i] + 1) as f64
    }

    pub fn estimates(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.arm_count()).map(|i| self.estimate(i))
    }

    pub fn record_own_pull(&mut self, i: usize, reward: f64) {
        self.own_pulls[i] += 1;
        self.observations[i] += 1;
        self.reward_sums[i] += reward;
    }

    pub fn record_received(&mut self, i: usize, reward: f64) {
        self.observations[i] += 1;
        self.reward_sums[i] += reward;
    }

    /// Arm with the highest estimate, lowest index on exact ties.
    pub fn greedy_arm(&self) -> usize {
        argmax_lowest(self.estimates())
    }

    pub fn own_pulls(&self) -> &[u64] {
        &self.own_pulls
    }

    pub fn observations(&self) -> &[u64] {
        &self.observations
    }

    pub fn reward_sums(&self) -> &[f64] {
        &self.reward_sums
    }

    pub fn initial_rewards(&self) -> &[f64] {
        &self.initial
    }

    /// Number of rounds this agent has played.
    pub fn rounds_played(&self) -> u64 {
        self.own_pulls.iter().sum()
    }
}
