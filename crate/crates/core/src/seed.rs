//! Counter-based seed splitting.
//!
//! Every random stream is addressed by `(master, index, tag)` and derived
//! without touching any shared generator, so results cannot depend on the
//! order in which parallel workers run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Distinct tags give independent streams for the same episode.
pub mod tag {
    pub const RESET: u64 = 1;
    pub const POLICY_RED: u64 = 2;
    pub const POLICY_BLUE: u64 = 3;
    pub const MATCH: u64 = 4;
    pub const ORACLE: u64 = 5;
    pub const TOURNAMENT: u64 = 6;
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derived 64-bit seed for `(master, index, tag)`.
pub fn derive(master: u64, index: u64, tag: u64) -> u64 {
    mix64(mix64(mix64(master) ^ index) ^ tag.rotate_left(32))
}

/// Generator for one `(master, index, tag)` stream.
pub fn stream(master: u64, index: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(master, index, 0));
    rng.set_stream(tag);
    rng
}
