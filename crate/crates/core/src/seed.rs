//! Seed hierarchy.
//!
//! Every random stream in the simulator is derived from a single base seed:
//! `base -> drop -> trial -> link`. Each level calls [`derive`] with the parent
//! seed and a stream index. The mixing function is SplitMix64 applied to
//! `parent + (index + 1) * 0x9E3779B97F4A7C15` (wrapping), which is simple to
//! reproduce in any language.
//!
//! Generators are ChaCha8 seeded through `SeedableRng::seed_from_u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of the SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `parent`.
pub fn derive(parent: u64, index: u64) -> u64 {
    splitmix64(parent.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Named stream offsets so that unrelated consumers of one parent seed never
/// collide.
pub mod stream {
    pub const PATHS: u64 = 1 << 32;
    pub const POSITIONS: u64 = 2 << 32;
    pub const SHADOWING: u64 = 3 << 32;
    pub const CODEBOOK: u64 = 4 << 32;
    pub const MEAN_AOA: u64 = 5 << 32;
    pub const TRIALS: u64 = 6 << 32;
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
