//! Seeded random number generation.
//!
//! Every stochastic step in the toolkit (splits, bootstrap resamples,
//! synthetic data, SVR fallback pairs) draws from ChaCha8 seeded through
//! [`SeedableRng::seed_from_u64`]. Streams are stable across platforms and
//! releases of `rand_chacha`, so a seed fully determines the output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the `index`-th member of an ensemble: seed + index.
pub fn derived(seed: u64, index: u64) -> Rng {
    seeded(seed.wrapping_add(index))
}
