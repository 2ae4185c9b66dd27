use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::tail_core::{IndexLaw, SummandLaw};

/// Paths simulated per RNG stream.
pub const BATCH_SIZE: u64 = 1 << 16;

/// Generator used for every simulation, recorded in reports.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha), stream = batch index";

/// `S = Σ_{i≤η} ξ(i) / (σ√A)` with `η` independent of the summands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompoundSpec {
    pub summand: SummandLaw,
    pub index: IndexLaw,
}

impl CompoundSpec {
    pub fn new(summand: SummandLaw, index: IndexLaw) -> Self {
        Self { summand, index }
    }

    /// `σ√A`.
    pub fn normalizer(&self) -> f64 {
        self.summand.sigma() * self.index.mean().sqrt()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let n = self.index.sample(rng);
        self.summand.sample_sum(n, rng) / self.normalizer()
    }

    /// Hex SHA-256 of the spec's debug form (stable across runs).
    pub fn hash(&self) -> String {
        spec_hash(&format!("{self:?}"))
    }
}

pub(crate) fn spec_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// RNG for batch `batch` of a run seeded with `seed`.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Calls `f(rng, count)` for each batch in order; counts sum to `n`.
pub(crate) fn for_each_batch(n: u64, seed: u64, mut f: impl FnMut(&mut ChaCha8Rng, u64)) {
    let mut batch = 0;
    let mut left = n;
    while left > 0 {
        let count = left.min(BATCH_SIZE);
        let mut rng = batch_rng(seed, batch);
        f(&mut rng, count);
        left -= count;
        batch += 1;
    }
}
