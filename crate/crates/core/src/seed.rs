//! Deterministic seed derivation.
//!
//! Every random stream in the pipeline is keyed by a path of integers rooted at
//! the master seed, so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Distinct tags keep sibling streams independent.
pub mod stream {
    pub const GEN: u64 = 0x67656e;
    pub const SOLVE: u64 = 0x736f6c76;
    pub const READ: u64 = 0x72656164;
    pub const TIE: u64 = 0x746965;
    pub const PARAMS: u64 = 0x706172;
    pub const SPLIT: u64 = 0x73706c;
    pub const PERMUTE: u64 = 0x7065726d;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `parent` together with `path` into a child seed.
pub fn derive(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(parent), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
