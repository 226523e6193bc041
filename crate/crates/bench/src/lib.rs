//! Input generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucit_core::{Dataset, Domain, Observation};

/// `n` pairs over a declared domain of `l` categories, using only `distinct` values per coordinate.
pub fn sparse_pairs(n: usize, l: u32, distinct: u32, seed: u64) -> Vec<(u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stride = (l / distinct).max(1);
    (0..n)
        .map(|_| {
            (
                1 + rng.gen_range(0..distinct) * stride,
                1 + rng.gen_range(0..distinct) * stride,
            )
        })
        .collect()
}

/// Uniform independent data over `[l1] × [l2] × [d]`.
pub fn uniform_dataset(n: usize, l1: u32, l2: u32, d: u32, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obs = (0..n)
        .map(|_| Observation::new(rng.gen_range(1..=l1), rng.gen_range(1..=l2), rng.gen_range(1..=d)))
        .collect();
    Dataset::new(obs, Domain::new(l1, l2, d).expect("positive sizes")).expect("in range")
}
