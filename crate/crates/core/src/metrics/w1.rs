use crate::error::{Error, Result};
use crate::scalar::{two_pi, Real};
use crate::torus::ParticleCloud;

/// Exact Wasserstein-1 distance between two particle clouds on the circle.
///
/// With `D = F_μ - F_ν` the difference of distribution functions on
/// `[0, 2π)`, the distance is `min_t ∫ |D(x) - t| dx`. `D` is piecewise
/// constant between consecutive support points, so the minimizing `t` is a
/// weighted median of its levels with the interval lengths as weights.
pub fn w1_circle<S: Real>(mu: &ParticleCloud<S>, nu: &ParticleCloud<S>) -> Result<S> {
    if mu.dim() != 1 || nu.dim() != 1 {
        return Err(Error::Unsupported("circular W1 requires d = 1".into()));
    }
    let mut events: Vec<(S, S)> = mu.coords().iter().copied().zip(mu.weights().iter().copied()).collect();
    events.extend(nu.coords().iter().copied().zip(nu.weights().iter().map(|&w| -w)));
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite coordinates"));

    // (level, length) of each piece of D, starting from D = 0 on [0, x_1).
    let mut pieces: Vec<(S, S)> = Vec::with_capacity(events.len() + 1);
    let (mut level, mut prev) = (S::zero(), S::zero());
    for (x, dw) in events {
        if x > prev {
            pieces.push((level, x - prev));
            prev = x;
        }
        level += dw;
    }
    pieces.push((level, two_pi::<S>() - prev));

    let mut sorted = pieces.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite levels"));
    let total: S = sorted.iter().map(|p| p.1).sum();
    let half = total / (S::one() + S::one());
    let mut acc = S::zero();
    let mut t = sorted.last().map(|p| p.0).unwrap_or_else(S::zero);
    for &(lvl, len) in &sorted {
        acc += len;
        if acc >= half {
            t = lvl;
            break;
        }
    }
    Ok(pieces.iter().map(|&(lvl, len)| len * (lvl - t).abs()).sum())
}
