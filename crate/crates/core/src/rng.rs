//! Seeded random substreams.
//!
//! Every consumer of randomness (pool, teacher, learner, trial) gets its own
//! stream derived from one root seed and a label, so a run can be replayed
//! from `(seed, config)` and trials can run in any order on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Derives an independent generator for `label` under the root `seed`.
pub fn substream(seed: u64, label: &str) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Derives a substream indexed by a trial number.
pub fn trial_stream(seed: u64, label: &str, trial: usize) -> StreamRng {
    substream(seed, &format!("{label}/{trial}"))
}
