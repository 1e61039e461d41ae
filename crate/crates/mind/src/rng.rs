//! Deterministic, parallelism-independent random streams.
//!
//! Every Monte-Carlo replicate gets its own counter-addressed ChaCha stream
//! derived from `(seed, replicate)`, so results are bit-identical no matter
//! how replicates are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// The stream for one replicate of one experiment.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// `n` i.i.d. `N(0, sigma^2)` draws from the given replicate stream.
pub fn gaussian_vector(seed: u64, replicate: u64, n: usize, sigma: f64) -> Vec<f64> {
    let mut rng = replicate_rng(seed, replicate);
    (0..n).map(|_| sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect()
}
