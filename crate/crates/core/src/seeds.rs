//! Deterministic seed derivation. All randomness in the crate flows from a
//! single 64-bit master seed through these helpers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(mix(master) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed of replication `rep` at study level `level` (e.g. the index of `n`).
pub fn replication_seed(master: u64, level: u64, rep: u64) -> u64 {
    derive_seed(derive_seed(master, level), rep)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
