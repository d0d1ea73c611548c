//! Seedable, splittable random streams for reproducible Monte Carlo.
//!
//! Every stream is derived from a 64-bit master seed plus a substream index,
//! so trial i always sees the same variates no matter how trials are chunked
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for substream `index` under the same master seed.
    /// Derivation depends only on (seed, index), never on consumption state.
    pub fn substream(&self, index: u64) -> Self {
        Self::derive(self.seed, index)
    }

    pub fn derive(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.gen(); // [0, 1)
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Exponential variate with the given rate, by inverse CDF.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -self.uniform_open().ln() / rate
    }
}
