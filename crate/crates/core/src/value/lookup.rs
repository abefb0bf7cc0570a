use crate::error::{Error, Result};
use crate::scalar::{count, lit, two_pi, Real};
use crate::torus::wrap_centered;

/// A Lipschitz, 2π-periodic function on `[-π, π)` given by node values at
/// `y_j = -π + 2πj/n` and linear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicLookup<S> {
    values: Vec<S>,
    lipschitz: S,
}

impl<S: Real> PeriodicLookup<S> {
    /// Builds the table and checks that consecutive slopes (including the
    /// wrap-around pair) stay within `lipschitz`.
    pub fn new(values: Vec<S>, lipschitz: S) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument("lookup needs at least two nodes".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || !lipschitz.is_finite() {
            return Err(Error::NonFinite("lookup value".into()));
        }
        let observed = slope_bound(&values);
        if observed > lipschitz * (S::one() + lit(1e-12)) + lit(1e-12) {
            return Err(Error::InvalidArgument(format!(
                "lookup slope {observed} exceeds declared Lipschitz constant {lipschitz}"
            )));
        }
        Ok(PeriodicLookup { values, lipschitz })
    }

    /// Samples `f` at `n` nodes; the Lipschitz constant is the largest
    /// observed slope.
    pub fn from_fn<F: Fn(S) -> S>(n: usize, f: F) -> Result<Self> {
        let h = two_pi::<S>() / count(n.max(1));
        let values: Vec<S> = (0..n).map(|j| f(-S::PI() + count::<S>(j) * h)).collect();
        let lip = slope_bound(&values);
        Self::new(values, lip)
    }

    pub fn constant(value: S) -> Self {
        PeriodicLookup { values: vec![value, value], lipschitz: S::zero() }
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn lipschitz(&self) -> S {
        self.lipschitz
    }

    pub fn min_value(&self) -> S {
        self.values.iter().copied().fold(S::infinity(), S::min)
    }

    pub fn max_abs(&self) -> S {
        self.values.iter().map(|v| v.abs()).fold(S::zero(), S::max)
    }

    pub fn eval(&self, y: S) -> S {
        let n = self.values.len();
        let h = two_pi::<S>() / count(n);
        let s = (wrap_centered(y) + S::PI()) / h;
        let j = s.floor();
        let frac = s - j;
        let j = j.to_usize().unwrap_or(0).min(n - 1);
        let next = (j + 1) % n;
        self.values[j] + frac * (self.values[next] - self.values[j])
    }
}

fn slope_bound<S: Real>(values: &[S]) -> S {
    let n = values.len();
    let h = two_pi::<S>() / count(n.max(1));
    (0..n).map(|j| (values[(j + 1) % n] - values[j]).abs() / h).fold(S::zero(), S::max)
}
