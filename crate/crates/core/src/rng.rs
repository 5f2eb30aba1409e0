//! Seeded randomness.
//!
//! Every random choice in the crate (formula generation, the Random heuristic, policy sampling,
//! parameter initialization, episode seeds) goes through [`SeededRng`], which is PCG-XSH-RR with
//! 64-bit state and 32-bit output (`rand_pcg::Pcg32`), seeded through `SeedableRng::seed_from_u64`.
//! Streams are therefore reproducible across platforms for a fixed `rand`/`rand_pcg` release.

use rand::SeedableRng;
use rand_pcg::Pcg32;

pub type SeededRng = Pcg32;

pub fn seeded(seed: u64) -> SeededRng {
    Pcg32::seed_from_u64(seed)
}

/// SplitMix64 finalizer: a bijective 64-bit mix.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a master seed and a key (formula hash, episode index,
/// ...). Adding keys never shifts the seeds of other keys.
pub fn derive_seed(master: u64, key: u64) -> u64 {
    splitmix64(splitmix64(master) ^ key)
}
