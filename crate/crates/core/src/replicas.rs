//! Independent Monte Carlo replicas with reproducible per-replica seeds.
//!
//! Replica `i` of a batch with base seed `s` always receives the seed
//! `s ^ splitmix64(i)`, and results come back in replica order, so a batch
//! gives identical output whether it runs on one thread or many.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used by every simulator in the crate.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser applied to `i + golden gamma`.
pub fn splitmix64(i: u64) -> u64 {
    let mut z = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replica_seed(base: u64, index: u64) -> u64 {
    base ^ splitmix64(index)
}

/// Runs `f(index, seed)` for every replica on the current thread.
pub fn map_sequential<T, F>(count: usize, base_seed: u64, f: F) -> Vec<T>
where
    F: Fn(usize, u64) -> T,
{
    (0..count).map(|i| f(i, replica_seed(base_seed, i as u64))).collect()
}

/// Runs `f(index, seed)` for every replica on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, F>(count: usize, base_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(|i| f(i, replica_seed(base_seed, i as u64))).collect()
}

/// Parallel when the `parallel` feature is enabled, sequential otherwise.
pub fn map<T, F>(count: usize, base_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(count, base_seed, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(count, base_seed, f)
    }
}
