//! Reproducible random streams.
//!
//! Everything random in the crate draws from ChaCha8 keyed by a 64-bit seed,
//! with independent sub-streams selected through the ChaCha stream counter.
//! A sub-stream depends only on `(seed, stream)`, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Packs a grid coordinate and replicate index into one stream id.
pub fn grid_stream(grid_index: usize, replicate: usize) -> u64 {
    ((grid_index as u64) << 32) | replicate as u64
}
