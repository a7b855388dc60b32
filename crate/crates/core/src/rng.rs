//! Seeded random streams.
//!
//! Every stochastic operation in the crate takes an explicit [`Stream`]. A
//! stream is a ChaCha12 generator (counter-based, so its output is identical on
//! every platform). Independent sub-streams for parallel tasks are derived with
//! [`child`], which mixes `(seed, index)` through SplitMix64 before seeding; the
//! result depends only on the pair, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type Stream = ChaCha12Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child of `seed`.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

pub fn stream(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}

/// Independent stream for task `index` under `seed`.
pub fn child(seed: u64, index: u64) -> Stream {
    stream(derive_seed(seed, index))
}
