//! Reproducible random streams. Every experiment draws from ChaCha8 seeded
//! with a user-visible `u64`; independent sub-experiments use separate
//! ChaCha streams of the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const RNG_NAME: &str = "chacha8";

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `index` of `seed`; streams never overlap.
pub fn derived(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for an independent sub-experiment `tag` of `seed`.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    rand::Rng::random(&mut derived(seed, tag ^ 0x5eed_0000_0000_0000))
}
