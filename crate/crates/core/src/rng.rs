//! Deterministic generator streams.
//!
//! Every run owns a ChaCha8 stream seeded from `run_seed(master, run)`:
//!
//! ```text
//! run_seed(master, run) = splitmix64(master ^ splitmix64(run))
//! ```
//!
//! where `splitmix64` is the SplitMix64 output function
//! (`x += 0x9E3779B97F4A7C15`, then two xor-shift-multiply rounds).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_seed(master: u64, run: u64) -> u64 {
    splitmix64(master ^ splitmix64(run))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
