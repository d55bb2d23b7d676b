//! Immutable problem description: arms, the agent graph and run configuration.
//!
//! Arm and agent indices are 0-based everywhere.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::ProtocolKind;

/// Distribution family shared by every arm of a [`RewardModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RewardFamily {
    /// `N(mu, sigma^2)`.
    #[default]
    Gaussian,
    /// Rewards in `{0, 1}` with `P(1) = mu`; `sigma` is only the known proxy.
    Bernoulli,
}

impl RewardFamily {
    pub fn name(self) -> &'static str {
        match self {
            RewardFamily::Gaussian => "gaussian",
            RewardFamily::Bernoulli => "bernoulli",
        }
    }
}

impl fmt::Display for RewardFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub mu: f64,
    /// Square root of the variance proxy.
    pub sigma: f64,
}

#[derive(Debug, Clone)]
enum Sampler {
    Gaussian(Normal<f64>),
    Bernoulli(f64),
}

/// Per-arm reward distributions with the derived optimal arm and gaps.
#[derive(Debug, Clone)]
pub struct RewardModel {
    family: RewardFamily,
    arms: Vec<Arm>,
    samplers: Vec<Sampler>,
    optimal: usize,
}

impl RewardModel {
    pub fn new(family: RewardFamily, arms: Vec<Arm>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::usage(format!(
                "a reward model needs at least 2 arms, got {}",
                arms.len()
            )));
        }
        let mut samplers = Vec::with_capacity(arms.len());
        for (i, arm) in arms.iter().enumerate() {
            if !arm.mu.is_finite() {
                return Err(Error::usage(format!("arm {i}: mu must be finite")));
            }
            if !(arm.sigma.is_finite() && arm.sigma > 0.0) {
                return Err(Error::usage(format!(
                    "arm {i}: sigma must be finite and strictly positive, got {}",
                    arm.sigma
                )));
            }
            samplers.push(match family {
                RewardFamily::Gaussian => Sampler::Gaussian(
                    Normal::new(arm.mu, arm.sigma)
                        .map_err(|e| Error::usage(format!("arm {i}: {e}")))?,
                ),
                RewardFamily::Bernoulli => {
                    if !(0.0..=1.0).contains(&arm.mu) {
                        return Err(Error::usage(format!(
                            "arm {i}: bernoulli mean must lie in [0, 1], got {}",
                            arm.mu
                        )));
                    }
                    Sampler::Bernoulli(arm.mu)
                }
            });
        }
        let optimal = argmax_lowest(arms.iter().map(|a| a.mu));
        Ok(Self {
            family,
            arms,
            samplers,
            optimal,
        })
    }

    /// Gaussian model from parallel `mu` / `sigma` lists.
    pub fn gaussian(mu: &[f64], sigma: &[f64]) -> Result<Self> {
        Self::from_lists(RewardFamily::Gaussian, mu, sigma)
    }

    pub fn from_lists(family: RewardFamily, mu: &[f64], sigma: &[f64]) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(Error::usage(format!(
                "mu has {} entries but sigma has {}",
                mu.len(),
                sigma.len()
            )));
        }
        let arms = mu
            .iter()
            .zip(sigma)
            .map(|(&mu, &sigma)| Arm { mu, sigma })
            .collect();
        Self::new(family, arms)
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.arms[i].mu
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.arms[i].sigma
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.sigma).collect()
    }

    /// Index of the largest mean; the lowest index wins an exact tie.
    pub fn optimal_arm(&self) -> usize {
        self.optimal
    }

    pub fn gap(&self, i: usize) -> Result<f64> {
        if i >= self.arms.len() {
            return Err(Error::usage(format!(
                "arm index {i} out of range for {} arms",
                self.arms.len()
            )));
        }
        Ok(self.arms[self.optimal].mu - self.arms[i].mu)
    }

    /// All gaps, indexed by arm.
    pub fn gaps(&self) -> Vec<f64> {
        let best = self.arms[self.optimal].mu;
        self.arms.iter().map(|a| best - a.mu).collect()
    }

    /// Draws one reward for arm `i`.
    pub fn sample<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> f64 {
        match &self.samplers[i] {
            Sampler::Gaussian(normal) => normal.sample(rng),
            Sampler::Bernoulli(p) => {
                if rng.random_bool(*p) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Argmax over a sequence, first maximal element on ties.
pub(crate) fn argmax_lowest(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Fixed undirected communication graph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    neighbors: Vec<Vec<usize>>,
    edge_count: usize,
}

impl NetworkGraph {
    pub fn complete(agents: usize) -> Result<Self> {
        check_agents(agents)?;
        let neighbors = (0..agents)
            .map(|k| (0..agents).filter(|&j| j != k).collect())
            .collect();
        Ok(Self {
            neighbors,
            edge_count: agents * (agents - 1) / 2,
        })
    }

    /// Graph from unordered pairs. Duplicate pairs collapse; self-loops are rejected.
    pub fn from_edges(agents: usize, edges: &[(usize, usize)]) -> Result<Self> {
        check_agents(agents)?;
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= agents || b >= agents {
                return Err(Error::usage(format!(
                    "edge ({a}, {b}) references an agent outside 0..{agents}"
                )));
            }
            if a == b {
                return Err(Error::usage(format!("self-loop on agent {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut neighbors = vec![Vec::new(); agents];
        for &(a, b) in &set {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            neighbors,
            edge_count: set.len(),
        })
    }

    pub fn ring(agents: usize) -> Result<Self> {
        check_agents(agents)?;
        let edges: Vec<_> = if agents < 2 {
            Vec::new()
        } else {
            (0..agents).map(|k| (k, (k + 1) % agents)).collect()
        };
        Self::from_edges(agents, &edges)
    }

    /// Agent 0 is the hub.
    pub fn star(agents: usize) -> Result<Self> {
        check_agents(agents)?;
        let edges: Vec<_> = (1..agents).map(|k| (0, k)).collect();
        Self::from_edges(agents, &edges)
    }

    pub fn agent_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors
            .get(a)
            .is_some_and(|list| list.binary_search(&b).is_ok())
    }

    /// Sorted unordered pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (a, list) in self.neighbors.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }
}

fn check_agents(agents: usize) -> Result<()> {
    if agents == 0 {
        return Err(Error::usage("a graph needs at least one agent"));
    }
    Ok(())
}

/// Everything needed to run trials of one protocol.
#[derive(Debug, Clone)]
pub struct SimConfig {
    model: RewardModel,
    graph: NetworkGraph,
    horizon: usize,
    trials: usize,
    xi: f64,
    protocol: ProtocolKind,
    master_seed: u64,
}

impl SimConfig {
    pub fn new(
        model: RewardModel,
        graph: NetworkGraph,
        horizon: usize,
        trials: usize,
        xi: f64,
        protocol: ProtocolKind,
        master_seed: u64,
    ) -> Result<Self> {
        if !(xi.is_finite() && xi > 1.0) {
            return Err(Error::config(
                "xi",
                format!("must satisfy xi > 1, got {xi}"),
            ));
        }
        if horizon == 0 {
            return Err(Error::config("horizon", "must be a positive integer"));
        }
        if trials == 0 {
            return Err(Error::config("trials", "must be a positive integer"));
        }
        Ok(Self {
            model,
            graph,
            horizon,
            trials,
            xi,
            protocol,
            master_seed,
        })
    }

    pub fn model(&self) -> &RewardModel {
        &self.model
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn agent_count(&self) -> usize {
        self.graph.agent_count()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn protocol(&self) -> ProtocolKind {
        self.protocol
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn with_protocol(mut self, protocol: ProtocolKind) -> Self {
        self.protocol = protocol;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Result<Self> {
        if trials == 0 {
            return Err(Error::config("trials", "must be a positive integer"));
        }
        self.trials = trials;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_mu() -> Vec<f64> {
        let mut mu = vec![10.0; 10];
        mu[0] = 11.0;
        mu
    }

    #[test]
    fn optimal_arm_examples() {
        let m = RewardModel::gaussian(&paper_mu(), &[1.0; 10]).unwrap();
        assert_eq!(m.optimal_arm(), 0);
        let m = RewardModel::gaussian(&[5.0, 5.0], &[1.0, 1.0]).unwrap();
        assert_eq!(m.optimal_arm(), 0);
        let m = RewardModel::gaussian(&[1.0, 3.0, 2.0], &[1.0; 3]).unwrap();
        assert_eq!(m.optimal_arm(), 1);
    }

    #[test]
    fn gap_examples() {
        let m = RewardModel::gaussian(&paper_mu(), &[1.0; 10]).unwrap();
        assert_eq!(m.gap(3).unwrap(), 1.0);
        assert_eq!(m.gap(0).unwrap(), 0.0);
        let m = RewardModel::gaussian(&[1.0, 3.0, 2.0], &[1.0; 3]).unwrap();
        assert_eq!(m.gap(2).unwrap(), 1.0);
        assert_eq!(m.gap(1).unwrap(), 0.0);
        assert!(matches!(m.gap(3), Err(Error::Usage(_))));
    }

    #[test]
    fn model_rejects_bad_arms() {
        assert!(RewardModel::gaussian(&[1.0], &[1.0]).is_err());
        assert!(RewardModel::gaussian(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(RewardModel::gaussian(&[1.0, 2.0], &[1.0, -1.0]).is_err());
        assert!(RewardModel::gaussian(&[1.0, 2.0], &[1.0]).is_err());
        assert!(RewardModel::gaussian(&[f64::NAN, 2.0], &[1.0, 1.0]).is_err());
        assert!(
            RewardModel::from_lists(RewardFamily::Bernoulli, &[0.5, 1.5], &[0.5, 0.5]).is_err()
        );
    }

    #[test]
    fn bernoulli_rewards_are_binary() {
        use rand::SeedableRng;
        let m = RewardModel::from_lists(RewardFamily::Bernoulli, &[0.3, 0.9], &[0.5, 0.5]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let draws: Vec<f64> = (0..2000).map(|_| m.sample(1, &mut rng)).collect();
        assert!(draws.iter().all(|&x| x == 0.0 || x == 1.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.9).abs() < 0.03, "{mean}");
    }

    #[test]
    fn complete_graph_examples() {
        let g = NetworkGraph::complete(100).unwrap();
        assert!((0..100).all(|k| g.neighbors(k).len() == 99));
        assert_eq!(g.edge_count(), 4950);

        let g = NetworkGraph::complete(1).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.neighbors(0).is_empty());

        let g = NetworkGraph::complete(3).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);

        assert!(matches!(NetworkGraph::complete(0), Err(Error::Usage(_))));
    }

    #[test]
    fn edge_list_validation() {
        assert!(NetworkGraph::from_edges(3, &[(0, 0)]).is_err());
        assert!(NetworkGraph::from_edges(3, &[(0, 3)]).is_err());
        let g = NetworkGraph::from_edges(3, &[(1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn ring_and_star_shapes() {
        let ring = NetworkGraph::ring(5).unwrap();
        assert!((0..5).all(|k| ring.neighbors(k).len() == 2));
        assert_eq!(NetworkGraph::ring(2).unwrap().edge_count(), 1);
        assert_eq!(NetworkGraph::ring(1).unwrap().edge_count(), 0);

        let star = NetworkGraph::star(6).unwrap();
        assert_eq!(star.neighbors(0), &[1, 2, 3, 4, 5]);
        assert!((1..6).all(|k| star.neighbors(k) == [0]));
    }

    #[test]
    fn sim_config_rejects_invalid_values() {
        let m = RewardModel::gaussian(&[1.0, 2.0], &[1.0, 1.0]).unwrap();
        let g = NetworkGraph::complete(2).unwrap();
        let mk = |t, n, xi| SimConfig::new(m.clone(), g.clone(), t, n, xi, ProtocolKind::Full, 0);
        assert!(mk(10, 1, 1.01).is_ok());
        assert!(matches!(mk(10, 1, 1.0), Err(Error::Config { ref key, .. }) if key == "xi"));
        assert!(matches!(mk(10, 1, 0.5), Err(Error::Config { ref key, .. }) if key == "xi"));
        assert!(matches!(mk(0, 1, 2.0), Err(Error::Config { ref key, .. }) if key == "horizon"));
        assert!(matches!(mk(10, 0, 2.0), Err(Error::Config { ref key, .. }) if key == "trials"));
        assert!(mk(10, 1, f64::NAN).is_err());
    }
}
