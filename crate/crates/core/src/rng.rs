//! Seed derivation for reproducible per-query randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a sequence of words into one well-spread seed.
pub fn derive_seed(seed: u64, words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = splitmix(seed ^ 0x6a09_e667_f3bc_c909);
    for w in words {
        h = splitmix(h ^ w);
    }
    h
}

pub fn derived_rng(seed: u64, words: impl IntoIterator<Item = u64>) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, words))
}
