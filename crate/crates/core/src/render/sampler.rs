//! Deterministic per-pixel random streams.
//!
//! Every (seed, pixel, sample) triple maps to an independent generator, so
//! the image is byte-identical no matter how pixels are scheduled across
//! threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn pixel_rng(seed: u64, pixel_index: u64, sample_index: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ pixel_index) ^ sample_index);
    ChaCha8Rng::seed_from_u64(key)
}
