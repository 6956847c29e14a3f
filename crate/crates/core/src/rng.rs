//! Seeded random number streams.
//!
//! Every random routine in the crate takes a generic [`rand::Rng`]; these
//! helpers build the reproducible ChaCha streams used by the inference
//! engines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type GkRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> GkRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream for work item `index` under a run seed, so that
/// results do not depend on how work is batched or scheduled.
pub fn stream(seed: u64, index: u64) -> GkRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
