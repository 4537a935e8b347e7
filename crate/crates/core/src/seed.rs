//! Seed derivation. Every sub-seed in the crate comes from a master seed via
//! [`derive`], so whole experiments are pure functions of one number.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `seed_i = mix64(master ^ mix64(stream))`.
pub fn derive(master: u64, stream: u64) -> u64 {
    mix64(master ^ mix64(stream))
}

/// The crate-wide RNG: ChaCha8 seeded from a `u64`.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
