//! Seeded random number generation.
//!
//! Every random choice in the crate draws from ChaCha8 seeded through
//! [`rand::SeedableRng::seed_from_u64`], so outputs depend only on the seed and
//! not on platform or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
