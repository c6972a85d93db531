//! Reproducible, splittable random streams.
//!
//! A stream is identified by `(seed, stream_id)`. It is backed by ChaCha20
//! keyed from `seed` with the 64-bit ChaCha stream selector set to
//! `stream_id`, so identical identifiers give identical sequences on every
//! platform and distinct stream ids never overlap.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::special::normal_quantile;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives an independent child stream. The child key mixes the parent
    /// identifiers, so children of different parents do not collide.
    pub fn split(&self, child: u64) -> RngStream {
        let key = splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        RngStream::new(key, child)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw by inverse-CDF transform of one uniform.
    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn normals(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.normal()).collect()
    }

    /// Uniform index in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        // multiply-shift; bias is below 2^-64 * bound
        ((self.next_u64() as u128 * bound as u128) >> 64) as usize
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
