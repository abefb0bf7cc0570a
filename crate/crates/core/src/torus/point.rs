use crate::error::{Error, Result};
use crate::scalar::{lit, two_pi, Real};

/// Largest supported torus dimension.
pub const MAX_DIM: usize = 3;

/// Reduces a real coordinate into `[0, 2π)`.
#[inline]
pub fn wrap<S: Real>(x: S) -> S {
    let period = two_pi::<S>();
    let r = x - period * (x / period).floor();
    // `r` can round up to exactly 2π for tiny negative inputs.
    if r >= period || r < S::zero() {
        S::zero()
    } else {
        r
    }
}

/// Signed representative of `x` in `[-π, π)`.
#[inline]
pub fn wrap_centered<S: Real>(x: S) -> S {
    let pi = S::PI();
    let r = wrap(x + pi) - pi;
    if r >= pi {
        r - two_pi::<S>()
    } else {
        r
    }
}

/// Geodesic distance between two angles on the circle.
#[inline]
pub fn circle_distance<S: Real>(x: S, y: S) -> S {
    let delta = wrap(x - y);
    delta.min(two_pi::<S>() - delta)
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("torus dimension {dim} (supported: 1..={MAX_DIM})")))
    }
}

/// A point of `T^d = R^d / (2πZ)^d` with every coordinate in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint<S> {
    coords: Vec<S>,
}

impl<S: Real> TorusPoint<S> {
    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Distance `inf_k |x - y - 2πk|`.
    pub fn distance(&self, other: &Self) -> Result<S> {
        torus_distance(&self.coords, &other.coords)
    }
}

/// Reduces each coordinate of `x` modulo `2π`.
pub fn reduce_to_torus<S: Real>(x: &[S]) -> Result<TorusPoint<S>> {
    check_dim(x.len())?;
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("coordinate {bad}")));
    }
    Ok(TorusPoint { coords: x.iter().map(|&v| wrap(v)).collect() })
}

/// Torus distance between coordinate slices of equal length.
pub fn torus_distance<S: Real>(x: &[S], y: &[S]) -> Result<S> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let sq: S = x.iter().zip(y).map(|(&a, &b)| circle_distance(a, b).powi(2)).sum();
    Ok(sq.sqrt())
}

/// Upper bound `π√d` on the torus diameter.
pub fn diameter<S: Real>(dim: usize) -> S {
    S::PI() * lit::<S>(dim as f64).sqrt()
}
