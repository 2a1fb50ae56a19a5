//! Deterministic per-link random streams.
//!
//! Each stream is keyed by `(master_seed, run_index, link_id)` so runs can
//! be evaluated in any order, on any number of workers, with identical
//! results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, run_index: u64, link_id: u64) -> u64 {
    let a = splitmix64(master_seed);
    let b = splitmix64(a ^ run_index);
    splitmix64(b ^ link_id.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn link_rng(master_seed: u64, run_index: u64, link_id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, run_index, link_id))
}
