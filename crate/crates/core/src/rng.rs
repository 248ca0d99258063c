//! Seeded random streams shared by the instance generators and the
//! evolution loop.
//!
//! Every stream is ChaCha8 keyed through `SeedableRng::seed_from_u64`, and
//! a uniform choice from `k` options is `next_u64() % k`. Both are fixed so
//! that instance files can be regenerated by other implementations.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SeededStream {
    inner: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        SeededStream { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream `stream` under the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededStream { inner }
    }

    /// Uniform index in `0..k`. `k` must be non-zero.
    pub fn pick(&mut self, k: usize) -> usize {
        assert!(k > 0, "pick from an empty range");
        (self.inner.next_u64() % k as u64) as usize
    }

    /// In-place Fisher–Yates shuffle driven by [`SeededStream::pick`].
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.pick(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
