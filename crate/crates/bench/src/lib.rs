//! Input generators shared by the benchmarks.

use loadsim_core::Cinr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` CINRs drawn from an exponential distribution with the given mean,
/// which is what a Rayleigh channel at a fixed noise level produces.
pub fn rayleigh_cinrs(n: usize, mean: f64, seed: u64) -> Vec<Cinr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Cinr::new(-(1.0 - rng.random::<f64>()).ln() * mean).expect("finite cinr"))
        .collect()
}
