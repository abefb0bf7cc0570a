//! Small summary statistics used by the probes.

use crate::scalar::{count, Real};

pub fn mean<S: Real>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    xs.iter().copied().sum::<S>() / count(xs.len())
}

/// Sample standard deviation (`n - 1` denominator); zero for fewer than two values.
pub fn std_dev<S: Real>(xs: &[S]) -> S {
    if xs.len() < 2 {
        return S::zero();
    }
    let m = mean(xs);
    (xs.iter().map(|&x| (x - m) * (x - m)).sum::<S>() / count(xs.len() - 1)).sqrt()
}

/// Standard error of the mean.
pub fn std_error<S: Real>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    std_dev(xs) / count::<S>(xs.len()).sqrt()
}

/// Least-squares slope of `y` against `x`.
pub fn slope<S: Real>(xs: &[S], ys: &[S]) -> Option<S> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: S = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: S = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    (sxx > S::zero()).then(|| sxy / sxx)
}

/// Slope of `log y` against `log x`; `None` if any value is not positive.
pub fn log_log_slope<S: Real>(xs: &[S], ys: &[S]) -> Option<S> {
    if xs.iter().chain(ys).any(|&v| !(v > S::zero())) {
        return None;
    }
    let lx: Vec<S> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<S> = ys.iter().map(|v| v.ln()).collect();
    slope(&lx, &ly)
}
