//! Seed derivation and per-particle normal streams.
//!
//! Every particle owns a ChaCha8 stream selected by its index, so the noise a
//! particle sees depends only on `(seed, particle)` and never on how work is
//! scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::{lit, Real};

/// Tags separating the independent uses of one user seed.
pub mod tag {
    pub const INITIAL: u64 = 0x1;
    pub const NOISE: u64 = 0x2;
    pub const REPLICATE: u64 = 0x3;
    pub const PAIRS: u64 = 0x4;
    pub const COMPETITORS: u64 = 0x5;
}

/// Mixes `tag` into `seed` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A ChaCha8 generator positioned at the start of stream `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[0, 1)`.
#[inline]
pub fn uniform<S: Real, R: Rng + ?Sized>(rng: &mut R) -> S {
    let bits = rng.next_u64() >> 11;
    lit::<S>(bits as f64 * (1.0 / (1u64 << 53) as f64))
}

/// One standard-normal stream per particle.
pub struct NormalStreams {
    rngs: Vec<ChaCha8Rng>,
    noise_dim: usize,
}

impl NormalStreams {
    pub fn new(seed: u64, particles: usize, noise_dim: usize) -> Self {
        let rngs = (0..particles as u64).map(|p| stream_rng(seed, p)).collect();
        NormalStreams { rngs, noise_dim }
    }

    pub fn particles(&self) -> usize {
        self.rngs.len()
    }

    /// Writes the next `noise_dim` normals of every particle into `out`
    /// (particle-major).
    pub fn fill<S: Real>(&mut self, out: &mut [S]) {
        let nd = self.noise_dim;
        assert_eq!(out.len(), self.rngs.len() * nd);
        for (rng, chunk) in self.rngs.iter_mut().zip(out.chunks_exact_mut(nd.max(1))) {
            for z in chunk.iter_mut().take(nd) {
                let v: f64 = StandardNormal.sample(rng);
                *z = lit(v);
            }
        }
    }
}

/// Precomputed normals `[step][particle][noise_dim]`, identical to what
/// [`NormalStreams`] produces for the same seed.
#[derive(Clone, Debug)]
pub struct NoiseBank<S> {
    steps: usize,
    stride: usize,
    data: Vec<S>,
}

impl<S: Real> NoiseBank<S> {
    pub fn new(seed: u64, steps: usize, particles: usize, noise_dim: usize) -> Self {
        let stride = particles * noise_dim;
        let mut data = vec![S::zero(); steps * stride];
        let mut streams = NormalStreams::new(seed, particles, noise_dim);
        if stride > 0 {
            for chunk in data.chunks_exact_mut(stride) {
                streams.fill(chunk);
            }
        }
        NoiseBank { steps, stride, data }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self, j: usize) -> &[S] {
        &self.data[j * self.stride..(j + 1) * self.stride]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_by_tag() {
        assert_ne!(derive_seed(7, tag::INITIAL), derive_seed(7, tag::NOISE));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn bank_matches_streams() {
        let bank = NoiseBank::<f64>::new(11, 3, 4, 2);
        let mut streams = NormalStreams::new(11, 4, 2);
        let mut buf = vec![0.0; 8];
        for j in 0..3 {
            streams.fill(&mut buf);
            assert_eq!(bank.step(j), &buf[..]);
        }
    }

    #[test]
    fn particle_streams_are_independent_of_count() {
        let mut a = NormalStreams::new(5, 2, 1);
        let mut b = NormalStreams::new(5, 10, 1);
        let mut x = vec![0.0f64; 2];
        let mut y = vec![0.0f64; 10];
        a.fill(&mut x);
        b.fill(&mut y);
        assert_eq!(x[..], y[..2]);
    }
}
