//! Deterministic seed mixing and per-agent random substreams.
//!
//! Every trial seed fans out into independent ChaCha8 streams keyed by
//! `(agent, purpose)`, so no stream depends on the order in which agents or
//! trials are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Bijective on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `words` into `seed` one at a time.
pub fn mix_words(seed: u64, words: &[u64]) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    words.iter().fold(mix64(seed), |acc, &w| {
        mix64(acc.wrapping_add(GOLDEN) ^ mix64(w.wrapping_add(GOLDEN)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Init,
    Reward,
    TieBreak,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Init => 0x01,
            StreamPurpose::Reward => 0x02,
            StreamPurpose::TieBreak => 0x03,
        }
    }
}

pub fn substream(trial_seed: u64, agent: usize, purpose: StreamPurpose) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_words(trial_seed, &[agent as u64, purpose.tag()]))
}
