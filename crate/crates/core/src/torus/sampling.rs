use crate::error::{Error, Result};
use crate::rng::{stream_rng, uniform};
use crate::scalar::Real;

use super::measure::{ParticleCloud, TorusMeasure};
use super::point::wrap;

/// Draws `n` i.i.d. points from `μ`, returned as an equal-weight cloud.
///
/// Each draw consumes exactly `1 + d` uniforms from one ChaCha8 stream: one
/// to pick an atom or cell by inverse CDF, then one per axis for the
/// position inside a grid cell. Two measures sampled with the same seed are
/// therefore quantile-coupled.
pub fn sample_measure<S: Real>(mu: &TorusMeasure<S>, n: usize, seed: u64) -> Result<ParticleCloud<S>> {
    if n < 1 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let d = mu.dim();
    let mut rng = stream_rng(seed, 0);
    let masses: Vec<S> = match mu {
        TorusMeasure::Particles(c) => c.weights().to_vec(),
        TorusMeasure::Grid(g) => g.masses(),
    };
    let mut cumulative = Vec::with_capacity(masses.len());
    let mut acc = S::zero();
    for m in &masses {
        acc += *m;
        cumulative.push(acc);
    }
    let total = acc;
    let mut coords = Vec::with_capacity(n * d);
    let mut lower = vec![S::zero(); d];
    for _ in 0..n {
        let u = uniform::<S, _>(&mut rng) * total;
        let mut i = cumulative.partition_point(|&c| c <= u).min(masses.len() - 1);
        // Never land on an atom of zero mass.
        while masses[i] <= S::zero() && i > 0 {
            i -= 1;
        }
        match mu {
            TorusMeasure::Particles(c) => {
                coords.extend_from_slice(c.point(i));
                for _ in 0..d {
                    let _ = uniform::<S, _>(&mut rng);
                }
            }
            TorusMeasure::Grid(g) => {
                let sides = g.cell_bounds(i, &mut lower);
                for a in 0..d {
                    coords.push(wrap(lower[a] + uniform::<S, _>(&mut rng) * sides[a]));
                }
            }
        }
    }
    ParticleCloud::uniform(d, coords)
}
