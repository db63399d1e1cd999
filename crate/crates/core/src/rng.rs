//! Reproducible random substreams.
//!
//! Generator: ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`). Substream `k`
//! of a run seeded with `seed` is
//!
//! ```text
//! ChaCha8Rng::seed_from_u64(splitmix64(seed + k * 0x9E37_79B9_7F4A_7C15))
//! ```
//!
//! with wrapping arithmetic, where `splitmix64` is the SplitMix64 output
//! finalizer and `seed_from_u64` is rand_core's portable PCG32 seed
//! expansion. Simulations split their trial sequence into fixed blocks of
//! [`BLOCK_TRIALS`] trials and draw block `k` from substream `k`, so the
//! stream does not depend on how blocks are spread across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const BLOCK_TRIALS: u64 = 1 << 16;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)))
}

pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, index))
}
