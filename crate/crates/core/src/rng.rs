//! Seed derivation. Every trial owns an independent ChaCha stream keyed by
//! `(master_seed, index)`, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// The stream for `index` under `master_seed`.
pub fn stream(master_seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// A child seed, for code paths that take a seed rather than a stream.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    use rand::Rng;
    stream(master_seed, index).random()
}
