//! Batch experiments: many seeded trials per protocol, optionally in parallel.
//!
//! Results never depend on the degree of parallelism. Each trial's seed is a
//! pure function of `(master seed, protocol, trial index)` and trials are
//! collected in index order before aggregation.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};

use rayon::prelude::*;

use crate::engine::{run_trial, TrialResult};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, AggregateSeries};
use crate::model::SimConfig;
use crate::protocol::ProtocolKind;
use crate::rng::mix_words;

/// Mixes the inputs into a trial seed. With `shared_randomness` the protocol
/// is left out, so every protocol sees the same reward streams for a given
/// trial index.
pub fn derive_trial_seed(
    master: u64,
    protocol: ProtocolKind,
    trial_index: usize,
    shared_randomness: bool,
) -> u64 {
    let protocol_word = if shared_randomness { 0 } else { protocol.tag() };
    mix_words(master, &[protocol_word, trial_index as u64])
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    base: SimConfig,
    protocols: Vec<ProtocolKind>,
    parallelism: usize,
    shared_randomness: bool,
}

impl ExperimentPlan {
    /// `parallelism = 0` uses every available core.
    pub fn new(
        base: SimConfig,
        protocols: Vec<ProtocolKind>,
        parallelism: usize,
        shared_randomness: bool,
    ) -> Result<Self> {
        if protocols.is_empty() {
            return Err(Error::config(
                "protocols",
                "must name at least one protocol",
            ));
        }
        for (i, p) in protocols.iter().enumerate() {
            if protocols[..i].contains(p) {
                return Err(Error::config("protocols", format!("`{p}` is listed twice")));
            }
        }
        Ok(Self {
            base,
            protocols,
            parallelism,
            shared_randomness,
        })
    }

    pub fn base(&self) -> &SimConfig {
        &self.base
    }

    pub fn protocols(&self) -> &[ProtocolKind] {
        &self.protocols
    }

    pub fn trials(&self) -> usize {
        self.base.trials()
    }

    pub fn master_seed(&self) -> u64 {
        self.base.master_seed()
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism
    }

    pub fn shared_randomness(&self) -> bool {
        self.shared_randomness
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn config_for(&self, protocol: ProtocolKind) -> SimConfig {
        self.base.clone().with_protocol(protocol)
    }

    pub fn trial_seed(&self, protocol: ProtocolKind, trial_index: usize) -> u64 {
        derive_trial_seed(
            self.master_seed(),
            protocol,
            trial_index,
            self.shared_randomness,
        )
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism)
            .build()?)
    }
}

/// Progress callback: `(protocol, trials completed, trials total)`. May be
/// invoked from worker threads.
pub type Progress<'a> = &'a (dyn Fn(ProtocolKind, usize, usize) + Sync);

/// Runs every trial of one protocol, in trial-index order.
pub fn run_trials(plan: &ExperimentPlan, protocol: ProtocolKind) -> Result<Vec<TrialResult>> {
    run_trials_with_progress(plan, protocol, &|_, _, _| {})
}

pub fn run_trials_with_progress(
    plan: &ExperimentPlan,
    protocol: ProtocolKind,
    progress: Progress<'_>,
) -> Result<Vec<TrialResult>> {
    let config = plan.config_for(protocol);
    let total = plan.trials();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let pool = plan.pool()?;
    pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|trial| {
                let seed = plan.trial_seed(protocol, trial);
                let result = panic::catch_unwind(AssertUnwindSafe(|| run_trial(&config, seed)))
                    .map_err(|payload| Error::Trial {
                        protocol: protocol.to_string(),
                        trial,
                        source: Box::new(Error::usage(panic_message(&payload))),
                    })?;
                let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(protocol, n, total);
                Ok(result)
            })
            .collect()
    })
}

fn panic_message(payload: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "trial panicked".to_string()
    }
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<BTreeMap<ProtocolKind, AggregateSeries>> {
    run_experiment_with_progress(plan, &|_, _, _| {})
}

pub fn run_experiment_with_progress(
    plan: &ExperimentPlan,
    progress: Progress<'_>,
) -> Result<BTreeMap<ProtocolKind, AggregateSeries>> {
    let mut out = BTreeMap::new();
    for &protocol in plan.protocols() {
        let trials = run_trials_with_progress(plan, protocol, progress)?;
        let series = aggregate(&trials).map_err(|e| Error::Trial {
            protocol: protocol.to_string(),
            trial: 0,
            source: Box::new(e),
        })?;
        out.insert(protocol, series);
    }
    Ok(out)
}
