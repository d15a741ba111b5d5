//! Seeded random streams.
//!
//! Every consumer of randomness draws from a ChaCha8 stream addressed by
//! `(seed, stream)`. ChaCha is counter based, so distinct stream indices give
//! independent sequences regardless of which thread (or in which order) they
//! are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream indices reserved by the generators in this crate.
pub mod streams {
    pub const DATASET: u64 = 0;
    pub const SMOOTHING: u64 = 1;
    pub const MEMBERSHIP: u64 = 2;
    pub const POPULATION: u64 = 3;
    /// Restart `i` of the ERM search uses `RESTART_BASE + i`.
    pub const RESTART_BASE: u64 = 1 << 32;
}

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed, e.g. for grid point `index` of a sweep.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ tag.rotate_left(32)) ^ index)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
