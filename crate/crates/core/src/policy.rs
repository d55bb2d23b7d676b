//! UCB sampling rule with known per-arm variance proxies.
//!
//! The index of arm `i` after `t` completed rounds is
//!
//! ```text
//! Q_i(t) = mu_hat_i(t) + sigma_i * sqrt(2 (xi + 1) ln t / (N_i(t) + 1))
//! ```
//!
//! with the log term taken as zero for `t = 0` so the very first decision is
//! the argmax of the initial samples.

use rand::Rng;

use crate::agent::AgentState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    xi: f64,
    sigmas: Vec<f64>,
}

impl PolicyParams {
    pub fn new(xi: f64, sigmas: Vec<f64>) -> Result<Self> {
        if !(xi.is_finite() && xi > 1.0) {
            return Err(Error::config(
                "xi",
                format!("must satisfy xi > 1, got {xi}"),
            ));
        }
        if let Some(bad) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::usage(format!(
                "sigma must be strictly positive, got {bad}"
            )));
        }
        Ok(Self { xi, sigmas })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.sigmas[i]
    }

    fn log_term(&self, t: u64) -> f64 {
        log_term(self.xi, t as f64)
    }
}

/// `2 (xi + 1) ln t`, shared by every arm within a round. Zero for `t <= 1`.
fn log_term(xi: f64, t: f64) -> f64 {
    if t <= 1.0 {
        0.0
    } else {
        2.0 * (xi + 1.0) * t.ln()
    }
}

fn width(sigma: f64, log_term: f64, observations: u64) -> f64 {
    sigma * (log_term / (observations + 1) as f64).sqrt()
}

/// Exploration bonus for one arm after `t` completed rounds with
/// `observations` samples of it. Zero for `t <= 1`.
pub fn confidence_width(sigma: f64, xi: f64, t: f64, observations: u64) -> Result<f64> {
    for (name, v) in [("sigma", sigma), ("xi", xi), ("t", t)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::usage(format!("{name} must be nonnegative, got {v}")));
        }
    }
    Ok(width(sigma, log_term(xi, t), observations))
}

pub fn ucb_index(state: &AgentState, i: usize, t: u64, params: &PolicyParams) -> f64 {
    state.estimate(i) + width(params.sigma(i), params.log_term(t), state.observations()[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub arm: usize,
    /// The chosen arm's estimate is below the highest estimate. Away from
    /// exact ties this is the same as `arm != state.greedy_arm()`.
    pub exploring: bool,
}

/// Picks the arm with the largest index, breaking exact ties uniformly at
/// random. `rng` is only consumed when there is a tie.
pub fn select_arm<R: Rng + ?Sized>(
    state: &AgentState,
    t: u64,
    params: &PolicyParams,
    rng: &mut R,
) -> Selection {
    let log_term = params.log_term(t);
    let observations = state.observations();

    let mut best = f64::NEG_INFINITY;
    let mut best_estimate = f64::NEG_INFINITY;
    let mut ties = Ties::default();
    for (i, &obs) in observations.iter().enumerate() {
        let estimate = state.estimate(i);
        best_estimate = best_estimate.max(estimate);
        let q = estimate + width(params.sigma(i), log_term, obs);
        if q > best {
            best = q;
            ties.reset(i);
        } else if q == best {
            ties.push(i);
        }
    }

    let arm = match ties.len() {
        1 => ties.first(),
        n => ties.get(rng.random_range(0..n)),
    };
    Selection {
        arm,
        exploring: state.estimate(arm) < best_estimate,
    }
}

/// Indices attaining the running maximum; allocates only on an actual tie.
#[derive(Default)]
struct Ties {
    first: usize,
    rest: Vec<usize>,
}

impl Ties {
    fn reset(&mut self, i: usize) {
        self.first = i;
        self.rest.clear();
    }

    fn push(&mut self, i: usize) {
        self.rest.push(i);
    }

    fn len(&self) -> usize {
        1 + self.rest.len()
    }

    fn first(&self) -> usize {
        self.first
    }

    fn get(&self, n: usize) -> usize {
        if n == 0 {
            self.first
        } else {
            self.rest[n - 1]
        }
    }
}
