//! Deterministic seeding. Parallel work items draw their own generator from
//! the master seed and a task index, so parallel and sequential execution
//! produce bit-identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn master_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for task `index` under `seed`, independent of execution order.
pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    // splitmix64-style mixing keeps per-task streams well separated
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}
