//! Deterministic seeding.
//!
//! Every random operation takes a plain `u64` seed. Derived streams are
//! produced with a splitmix64 mix so that independent sub-tasks (per scene,
//! per object, per pixel) never share a generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th member of stream `stream` under `seed`.
pub fn derive(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stream)).wrapping_add(index))
}

pub mod streams {
    pub const SCENE: u64 = 1;
    pub const PLACEMENT: u64 = 2;
    pub const RENDER: u64 = 3;
    pub const CORRUPT: u64 = 4;
    pub const CROP: u64 = 5;
    pub const SAMPLER: u64 = 6;
    pub const REFINE: u64 = 7;
    pub const REFERENCE: u64 = 8;
    pub const HARD_NEGATIVE: u64 = 9;
    pub const FREE_SPACE: u64 = 10;
    pub const TARGET: u64 = 11;
    pub const BOOTSTRAP: u64 = 12;
    pub const EXPORT: u64 = 13;
    pub const SURFACE: u64 = 14;
    pub const ASSETS: u64 = 15;
    pub const BLOCKER: u64 = 16;
}
