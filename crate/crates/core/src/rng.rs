//! Seed derivation for reproducible, independently seeded trials.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] whose seed is derived
//! from a master seed and a path of integer labels (trial index, stream tag,
//! ...). Derivation is a pure function, so trials can be evaluated in any
//! order or on any thread without changing their output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels used when deriving per-trial seeds.
pub mod stream {
    pub const FIRST: u64 = 0x11;
    pub const SECOND: u64 = 0x22;
    pub const MASK: u64 = 0x33;
    pub const MASK_SECOND: u64 = 0x34;
    pub const START: u64 = 0x44;
    pub const DRIVER: u64 = 0x55;
    pub const DYNAMICS: u64 = 0x66;
    pub const AUX: u64 = 0x77;
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` by folding in each label of `path`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |acc, &label| mix64(acc ^ mix64(label)))
}

/// The generator used for every stream in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
