//! Seeded random streams.
//!
//! Every chain draws from ChaCha8 (`rand_chacha` 0.9) seeded with the run
//! seed, on a stream selected by the chain index. Distinct chain indices
//! give independent, non-overlapping sequences, and a chain's sequence does
//! not depend on how many other chains run or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

pub fn chain_rng(seed: u64, chain: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}
