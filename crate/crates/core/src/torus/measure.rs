use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::scalar::{count, lit, two_pi, Real};

use super::point::{check_dim, wrap, wrap_centered};

/// Weighted atoms in `[0, 2π)^d`, the common view used for integration.
///
/// A grid density is viewed through its cell midpoints carrying the cell
/// masses, which turns every integral into the midpoint rule.
#[derive(Clone, Debug)]
pub struct Atoms<'a, S: Clone> {
    dim: usize,
    coords: Cow<'a, [S]>,
    /// `None` means every atom has mass `1/len`.
    weights: Option<Cow<'a, [S]>>,
}

impl<'a, S: Real> Atoms<'a, S> {
    /// Equal-weight atoms; `coords` must already be reduced to the torus.
    pub fn uniform(dim: usize, coords: &'a [S]) -> Self {
        debug_assert_eq!(coords.len() % dim, 0);
        Atoms { dim, coords: Cow::Borrowed(coords), weights: None }
    }

    pub fn weighted(dim: usize, coords: &'a [S], weights: &'a [S]) -> Self {
        debug_assert_eq!(coords.len(), weights.len() * dim);
        Atoms { dim, coords: Cow::Borrowed(coords), weights: Some(Cow::Borrowed(weights)) }
    }

    pub(crate) fn owned(dim: usize, coords: Vec<S>, weights: Vec<S>) -> Atoms<'static, S> {
        Atoms { dim, coords: Cow::Owned(coords), weights: Some(Cow::Owned(weights)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[S] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> S {
        match &self.weights {
            Some(w) => w[i],
            None => S::one() / count(self.len()),
        }
    }

    pub fn has_uniform_weights(&self) -> bool {
        self.weights.is_none()
    }

    /// Iterator over `(point, weight)`.
    pub fn iter(&self) -> impl Iterator<Item = (&[S], S)> + '_ {
        (0..self.len()).map(move |i| (self.point(i), self.weight(i)))
    }

    /// `∫ f dμ`.
    pub fn integrate<F: FnMut(&[S]) -> S>(&self, mut f: F) -> S {
        match &self.weights {
            Some(w) => self.coords.chunks_exact(self.dim).zip(w.iter()).map(|(x, &wi)| wi * f(x)).sum(),
            None => {
                let total: S = self.coords.chunks_exact(self.dim).map(&mut f).sum();
                total / count(self.len())
            }
        }
    }

    pub fn to_cloud(&self) -> ParticleCloud<S> {
        let weights = (0..self.len()).map(|i| self.weight(i)).collect();
        ParticleCloud { dim: self.dim, coords: self.coords.to_vec(), weights }
    }
}

/// Finitely many weighted particles.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleCloud<S> {
    dim: usize,
    coords: Vec<S>,
    weights: Vec<S>,
}

fn check_weights<S: Real>(weights: &[S], masses: impl Iterator<Item = S>) -> Result<()> {
    if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
        return Err(Error::NonFinite(format!("weight {w}")));
    }
    if let Some(w) = weights.iter().find(|&&w| w < S::zero()) {
        return Err(Error::InvalidMeasure(format!("negative weight {w}")));
    }
    let total: S = masses.sum();
    if (total - S::one()).abs() > S::mass_tolerance() {
        return Err(Error::InvalidMeasure(format!("total mass {total} differs from 1")));
    }
    Ok(())
}

impl<S: Real> ParticleCloud<S> {
    /// Builds a cloud from flat coordinates (`len = n·dim`, reduced mod 2π) and weights.
    pub fn new(dim: usize, coords: Vec<S>, weights: Vec<S>) -> Result<Self> {
        check_dim(dim)?;
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("empty particle cloud".into()));
        }
        if coords.len() != weights.len() * dim {
            return Err(Error::DimensionMismatch { expected: weights.len() * dim, found: coords.len() });
        }
        if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {x}")));
        }
        check_weights(&weights, weights.iter().copied())?;
        let coords = coords.into_iter().map(wrap).collect();
        Ok(ParticleCloud { dim, coords, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(dim: usize, coords: Vec<S>) -> Result<Self> {
        check_dim(dim)?;
        let n = coords.len() / dim;
        let w = S::one() / count(n.max(1));
        Self::new(dim, coords, vec![w; n])
    }

    /// Point mass at `x`.
    pub fn dirac(x: &[S]) -> Result<Self> {
        Self::new(x.len(), x.to_vec(), vec![S::one()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[S] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> Atoms<'_, S> {
        Atoms::weighted(self.dim, &self.coords, &self.weights)
    }

    /// When every weight is a multiple of `1/n`, the `n` equal-weight
    /// coordinates describing exactly this measure.
    pub fn equal_weight_expansion(&self, n: usize) -> Option<Vec<S>> {
        let mut out = Vec::with_capacity(n * self.dim);
        let mut total = 0usize;
        for (i, &w) in self.weights.iter().enumerate() {
            let c = w * count::<S>(n);
            let r = c.round();
            if (c - r).abs() > lit(1e-9) {
                return None;
            }
            let r = r.to_usize()?;
            total += r;
            for _ in 0..r {
                out.extend_from_slice(self.point(i));
            }
        }
        (total == n).then_some(out)
    }
}

/// Piecewise-constant density on a uniform grid of `shape[0]×…×shape[d-1]`
/// cells, values stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity<S> {
    shape: Vec<usize>,
    values: Vec<S>,
}

impl<S: Real> GridDensity<S> {
    pub fn new(shape: Vec<usize>, values: Vec<S>) -> Result<Self> {
        check_dim(shape.len())?;
        if shape.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("grid axis with zero cells".into()));
        }
        let cells: usize = shape.iter().product();
        if values.len() != cells {
            return Err(Error::DimensionMismatch { expected: cells, found: values.len() });
        }
        let vol = cell_volume::<S>(&shape);
        check_weights(&values, values.iter().map(|&v| v * vol))?;
        Ok(GridDensity { shape, values })
    }

    /// Samples a nonnegative function at cell midpoints and normalizes it.
    pub fn from_fn<F: FnMut(&[S]) -> S>(shape: Vec<usize>, mut f: F) -> Result<Self> {
        check_dim(shape.len())?;
        let cells: usize = shape.iter().product();
        let mut x = vec![S::zero(); shape.len()];
        let mut values = Vec::with_capacity(cells);
        for i in 0..cells {
            midpoint_into(&shape, i, &mut x);
            values.push(f(&x));
        }
        let vol = cell_volume::<S>(&shape);
        let total: S = values.iter().map(|&v| v * vol).sum();
        if !(total > S::zero()) || !total.is_finite() {
            return Err(Error::InvalidMeasure(format!("density integrates to {total}")));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Self::new(shape, values)
    }

    pub fn uniform(shape: Vec<usize>) -> Result<Self> {
        Self::from_fn(shape, |_| S::one())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn cell_volume(&self) -> S {
        cell_volume(&self.shape)
    }

    /// Cell masses, row-major.
    pub fn masses(&self) -> Vec<S> {
        let vol = self.cell_volume();
        self.values.iter().map(|&v| v * vol).collect()
    }

    /// Lower corner and side lengths of cell `i`.
    pub fn cell_bounds(&self, i: usize, lower: &mut [S]) -> Vec<S> {
        midpoint_into(&self.shape, i, lower);
        let sides: Vec<S> = self.shape.iter().map(|&n| two_pi::<S>() / count(n)).collect();
        for (l, &h) in lower.iter_mut().zip(&sides) {
            *l -= h / lit(2.0);
        }
        sides
    }

    pub fn atoms(&self) -> Atoms<'static, S> {
        let d = self.dim();
        let mut coords = vec![S::zero(); self.values.len() * d];
        for (i, x) in coords.chunks_exact_mut(d).enumerate() {
            midpoint_into(&self.shape, i, x);
        }
        Atoms::owned(d, coords, self.masses())
    }
}

fn cell_volume<S: Real>(shape: &[usize]) -> S {
    shape.iter().map(|&n| two_pi::<S>() / count(n)).fold(S::one(), |a, b| a * b)
}

fn midpoint_into<S: Real>(shape: &[usize], mut i: usize, x: &mut [S]) {
    for a in (0..shape.len()).rev() {
        let j = i % shape[a];
        i /= shape[a];
        x[a] = (count::<S>(j) + lit(0.5)) * two_pi::<S>() / count(shape[a]);
    }
}

/// A probability measure on the torus.
#[derive(Clone, Debug, PartialEq)]
pub enum TorusMeasure<S> {
    Particles(ParticleCloud<S>),
    Grid(GridDensity<S>),
}

impl<S: Real> TorusMeasure<S> {
    pub fn dim(&self) -> usize {
        match self {
            TorusMeasure::Particles(c) => c.dim(),
            TorusMeasure::Grid(g) => g.dim(),
        }
    }

    pub fn atoms(&self) -> Atoms<'_, S> {
        match self {
            TorusMeasure::Particles(c) => c.atoms(),
            TorusMeasure::Grid(g) => g.atoms(),
        }
    }

    pub fn dirac(x: &[S]) -> Result<Self> {
        ParticleCloud::dirac(x).map(TorusMeasure::Particles)
    }

    /// `∫ f dμ` (exact sum for particles, midpoint rule for grids).
    pub fn integrate<F: FnMut(&[S]) -> S>(&self, f: F) -> S {
        self.atoms().integrate(f)
    }

    pub fn as_cloud(&self) -> Option<&ParticleCloud<S>> {
        match self {
            TorusMeasure::Particles(c) => Some(c),
            TorusMeasure::Grid(_) => None,
        }
    }
}

impl<S> From<ParticleCloud<S>> for TorusMeasure<S> {
    fn from(c: ParticleCloud<S>) -> Self {
        TorusMeasure::Particles(c)
    }
}

impl<S> From<GridDensity<S>> for TorusMeasure<S> {
    fn from(g: GridDensity<S>) -> Self {
        TorusMeasure::Grid(g)
    }
}

/// `(1-τ)μ + τν`. Two grids of equal shape stay a grid; anything else
/// becomes the union of the weighted atoms.
pub fn mixture<S: Real>(mu: &TorusMeasure<S>, nu: &TorusMeasure<S>, tau: S) -> Result<TorusMeasure<S>> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    if !(tau >= S::zero() && tau <= S::one()) {
        return Err(Error::InvalidArgument(format!("mixture parameter {tau} outside [0, 1]")));
    }
    let keep = S::one() - tau;
    if let (TorusMeasure::Grid(a), TorusMeasure::Grid(b)) = (mu, nu) {
        if a.shape == b.shape {
            let values = a.values.iter().zip(&b.values).map(|(&x, &y)| keep * x + tau * y).collect();
            return GridDensity::new(a.shape.clone(), values).map(TorusMeasure::Grid);
        }
    }
    let (am, an) = (mu.atoms(), nu.atoms());
    let mut coords = am.coords().to_vec();
    coords.extend_from_slice(an.coords());
    let mut weights: Vec<S> = (0..am.len()).map(|i| keep * am.weight(i)).collect();
    weights.extend((0..an.len()).map(|i| tau * an.weight(i)));
    ParticleCloud::new(mu.dim(), coords, weights).map(TorusMeasure::Particles)
}

/// Mass farther than this fraction of the lift edges on both sides marks
/// the lifted mean as ambiguous.
pub const LIFT_EDGE_MASS: f64 = 0.05;

/// Mean of a measure on the circle after lifting it to an interval of
/// length 2π centred on the measure's bulk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftMean<S> {
    /// Mean of the lifted measure, reported in `[-π, π)`.
    pub mean: S,
    /// Centre of the lift interval `[center-π, center+π)`.
    pub center: S,
    /// Significant mass sits within π/4 of both lift endpoints, or the
    /// measure has no preferred direction.
    pub ambiguous: bool,
}

/// `m(μ) = ∫ x μ(dx)` for a measure on `T¹`, computed on the lift interval
/// centred at the circular mean direction.
pub fn lift_mean<S: Real>(atoms: &Atoms<'_, S>) -> Result<LiftMean<S>> {
    if atoms.dim() != 1 {
        return Err(Error::Unsupported("lifted mean is defined for d = 1 only".into()));
    }
    let (mut c, mut s) = (S::zero(), S::zero());
    for (x, w) in atoms.iter() {
        let (sin, cos) = x[0].sin_cos();
        c += w * cos;
        s += w * sin;
    }
    let resultant = (c * c + s * s).sqrt();
    let center = s.atan2(c);
    let pi = S::PI();
    let quarter = pi / lit(4.0);
    let (mut mean, mut low, mut high) = (S::zero(), S::zero(), S::zero());
    for (x, w) in atoms.iter() {
        let offset = wrap_centered(x[0] - center);
        mean += w * offset;
        if offset < quarter - pi {
            low += w;
        } else if offset >= pi - quarter {
            high += w;
        }
    }
    let edge = lit::<S>(LIFT_EDGE_MASS);
    let ambiguous = (low > edge && high > edge) || resultant < lit(1e-9);
    Ok(LiftMean { mean: wrap_centered(center + mean), center, ambiguous })
}
