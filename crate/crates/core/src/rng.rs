//! Seed derivation and the portable generator used by every stochastic step.
//!
//! All randomness flows from a single 64-bit master seed. Child seeds are
//! derived by counter hashing: `derive_seed(parent, stream, index)` mixes the
//! parent seed with a stream tag and a counter through SplitMix64 finalizers.
//! The generator itself is ChaCha8, whose output stream is fixed across
//! platforms for a given seed, so results never depend on worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags keep independent uses of the same parent seed apart.
pub mod stream {
    pub const REALIZATION: u64 = 0x5245_414c;
    pub const SHOTS: u64 = 0x5348_4f54;
    pub const FROBENIUS: u64 = 0x4652_4f42;
    pub const LOWER_BOUND: u64 = 0x4c4f_5742;
    pub const GRID: u64 = 0x4752_4944;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent ^ splitmix64(stream)) ^ index)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
