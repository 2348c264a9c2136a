//! Seed plumbing. Every random stream in the pipeline is a ChaCha8 generator
//! keyed by a seed derived from the user seed and a stream path, so results do
//! not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags that keep the different consumers of one user seed apart.
pub mod stream {
    pub const SCENARIO: u64 = 0x5343_454e;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const WHITE: u64 = 0x5748_4954;
    pub const PINK: u64 = 0x5049_4e4b;
    pub const INIT: u64 = 0x494e_4954;
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const SPLIT: u64 = 0x5350_4c54;
    pub const FOLD: u64 = 0x464f_4c44;
    pub const SEARCH: u64 = 0x5345_4152;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `path` into `seed`. Distinct paths give unrelated seeds.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}
