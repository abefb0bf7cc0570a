use crate::error::{Error, Result};
use crate::scalar::{basis_modulus, count, lit, to_f64, two_pi, Real};
use crate::torus::{fourier_table, FourierTable, TorusMeasure};

use crate::torus::point::check_dim;

/// `n_*(d) = 3 + ⌊d/2⌋`, the smallest order whose dual metric controls
/// second derivatives.
pub fn n_star(dim: usize) -> Result<usize> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(3 + dim / 2)
}

/// Upper bound on `Σ_{|k|_∞ > K} (1+|k|²)^{-λ}` over `k ∈ Z^d`.
///
/// Shell `|k|_∞ = m` holds at most `2d(2m+1)^{d-1}` points with `|k| ≥ m`,
/// and the shell sum is compared with `∫_K^∞ x^{d-1-2λ} dx`.
pub fn tail_sum_bound<S: Real>(lambda: S, dim: usize, cutoff: usize) -> S {
    let d = count::<S>(dim);
    let two = lit::<S>(2.0);
    if two * lambda <= d || cutoff == 0 {
        return S::infinity();
    }
    let k = count::<S>(cutoff);
    let shell = two * d * (two + S::one() / (k + S::one())).powi(dim as i32 - 1);
    shell * k.powf(d - two * lambda) / (two * lambda - d)
}

/// Order `λ` of the weights `(1+|k|²)^{∓λ}` on `T^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevWeight<S> {
    lambda: S,
    dim: usize,
}

impl<S: Real> SobolevWeight<S> {
    pub fn new(lambda: S, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(lambda > S::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("Sobolev order {lambda} must be positive")));
        }
        Ok(SobolevWeight { lambda, dim })
    }

    /// Order `n_*(d)`.
    pub fn star(dim: usize) -> Result<Self> {
        Self::new(count(n_star(dim)?), dim)
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_k (1+|k|²)^{-λ} < ∞`, i.e. `2λ > d`.
    pub fn is_summable(&self) -> bool {
        lit::<S>(2.0) * self.lambda > count(self.dim)
    }

    pub fn require_summable(&self) -> Result<()> {
        if self.is_summable() {
            Ok(())
        } else {
            Err(Error::NotSummable { lambda: to_f64(self.lambda), dim: self.dim })
        }
    }

    /// `(1+|k|²)^{-λ}` for every index of `table`.
    pub fn dual_weights(&self, table: &FourierTable<S>) -> Vec<S> {
        table.wavenumbers_sq().into_iter().map(|k2| (S::one() + k2).powf(-self.lambda)).collect()
    }

    /// Certified bound on the metric lost by truncating at `K`:
    /// `(Σ_{|k|_∞>K}(1+|k|²)^{-λ})^{1/2}·2(2π)^{-d/2}`.
    pub fn truncation_error(&self, cutoff: usize) -> S {
        tail_sum_bound(self.lambda, self.dim, cutoff).sqrt() * lit::<S>(2.0) * basis_modulus::<S>(self.dim)
    }
}

/// A truncated metric or norm with a certified error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricResult<S> {
    pub value: S,
    pub truncation_error: S,
    pub cutoff: usize,
}

impl<S: Real> MetricResult<S> {
    /// Interval guaranteed to contain the untruncated quantity.
    pub fn interval(&self) -> (S, S) {
        ((self.value - self.truncation_error).max(S::zero()), self.value + self.truncation_error)
    }
}

/// How fast the coefficients of a function decay beyond its stored cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayCertificate<S> {
    /// The table is a trigonometric polynomial: nothing beyond its cutoff.
    TrigPolynomial,
    /// `|F_k(f)| ≤ constant·(1+|k|²)^{-order/2}` for `|k|_∞ > K`.
    Algebraic { constant: S, order: S },
}

/// `‖f‖_λ = (Σ (1+|k|²)^λ |F_k(f)|²)^{1/2}` over `|k|_∞ ≤ K`.
///
/// Without a certificate the tail is unknown and the reported error is
/// infinite.
pub fn sobolev_norm<S: Real>(
    f: &FourierTable<S>,
    weight: SobolevWeight<S>,
    cutoff: usize,
    certificate: Option<DecayCertificate<S>>,
) -> Result<MetricResult<S>> {
    if f.dim() != weight.dim() {
        return Err(Error::DimensionMismatch { expected: weight.dim(), found: f.dim() });
    }
    if cutoff > f.cutoff() {
        return Err(Error::InvalidArgument(format!("cutoff {cutoff} exceeds table cutoff {}", f.cutoff())));
    }
    let (mut inside, mut outside) = (S::zero(), S::zero());
    for (i, c) in f.coeffs().iter().enumerate() {
        let k = f.wavevector(i);
        let k2 = count::<S>(k.iter().map(|v| (v * v) as usize).sum());
        let term = (S::one() + k2).powf(weight.lambda()) * c.norm_sqr();
        if k.iter().all(|v| v.unsigned_abs() as usize <= cutoff) {
            inside += term;
        } else {
            outside += term;
        }
    }
    let truncation_error = match certificate {
        None => S::infinity(),
        Some(DecayCertificate::TrigPolynomial) => outside.sqrt(),
        Some(DecayCertificate::Algebraic { constant, order }) => {
            if cutoff == 0 {
                S::infinity()
            } else {
                constant * tail_sum_bound(order - weight.lambda(), f.dim(), cutoff).sqrt()
            }
        }
    };
    Ok(MetricResult { value: inside.sqrt(), truncation_error, cutoff })
}

/// `Σ w_k |a_k - b_k|²` over two tables of equal shape.
pub(crate) fn weighted_distance_sq<S: Real>(a: &FourierTable<S>, b: &FourierTable<S>, weights: &[S]) -> Result<S> {
    if a.dim() != b.dim() || a.cutoff() != b.cutoff() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.coeffs().iter().zip(b.coeffs()).zip(weights).map(|((x, y), &w)| w * (x - y).norm_sqr()).sum())
}

/// `ρ_λ` between two precomputed measure tables.
pub fn rho_from_tables<S: Real>(a: &FourierTable<S>, b: &FourierTable<S>, weight: SobolevWeight<S>) -> Result<MetricResult<S>> {
    weight.require_summable()?;
    if a.dim() != weight.dim() {
        return Err(Error::DimensionMismatch { expected: weight.dim(), found: a.dim() });
    }
    let sq = weighted_distance_sq(a, b, &weight.dual_weights(a))?;
    Ok(MetricResult { value: sq.sqrt(), truncation_error: weight.truncation_error(a.cutoff()), cutoff: a.cutoff() })
}

/// `ρ_λ(μ, ν) = (Σ (1+|k|²)^{-λ}|F_k(μ-ν)|²)^{1/2}`, truncated at `|k|_∞ ≤ K`.
pub fn rho_lambda<S: Real>(
    mu: &TorusMeasure<S>,
    nu: &TorusMeasure<S>,
    weight: SobolevWeight<S>,
    cutoff: usize,
) -> Result<MetricResult<S>> {
    weight.require_summable()?;
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    rho_from_tables(&fourier_table(mu, cutoff)?, &fourier_table(nu, cutoff)?, weight)
}

/// The function attaining `sup{η(ψ) : ‖ψ‖_λ ≤ |η|_λ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualMaximizer<S> {
    /// Coefficients `F_k(ψ̃) = (1+|k|²)^{-λ} F_k(η)`.
    pub function: FourierTable<S>,
    /// `η` vanished identically; `function` is zero.
    pub degenerate: bool,
}

/// Maximizer of the dual problem for the signed measure `η` given by its
/// Fourier table (typically `F(μ) - F(ν)`).
pub fn dual_maximizer<S: Real>(eta: &FourierTable<S>, weight: SobolevWeight<S>) -> Result<DualMaximizer<S>> {
    weight.require_summable()?;
    if eta.dim() != weight.dim() {
        return Err(Error::DimensionMismatch { expected: weight.dim(), found: eta.dim() });
    }
    let degenerate = eta.coeffs().iter().all(|c| c.norm_sqr() == S::zero());
    let w = weight.dual_weights(eta);
    let coeffs = eta.coeffs().iter().zip(&w).map(|(c, &wk)| c * wk).collect();
    Ok(DualMaximizer { function: FourierTable::from_coeffs(eta.dim(), eta.cutoff(), coeffs)?, degenerate })
}

/// `c_{m,d} = (2^m(1 + d^m(2π)^d))^{1/2}`, the constant in
/// `ρ̂_m ≤ c_{m,d} ρ_m`.
pub fn embedding_constant<S: Real>(m: u32, dim: usize) -> Result<S> {
    if m < 1 || dim < 1 {
        return Err(Error::InvalidArgument("embedding constant needs m >= 1 and d >= 1".into()));
    }
    let d = count::<S>(dim);
    let two = lit::<S>(2.0);
    Ok((two.powi(m as i32) * (S::one() + d.powi(m as i32) * two_pi::<S>().powi(dim as i32))).sqrt())
}

/// Default cutoff for [`tail_constant_c`].
pub const TAIL_CONSTANT_CUTOFF: usize = 64;

/// Certified enclosure `[lower, upper]` of `c(d) = Σ_{k∈Z^d}(1+|k|²)^{2-n_*}`.
pub fn tail_constant_c<S: Real>(dim: usize, cutoff: Option<usize>) -> Result<(S, S)> {
    check_dim(dim)?;
    let cutoff = cutoff.unwrap_or(TAIL_CONSTANT_CUTOFF).max(1);
    let exponent = count::<S>(n_star(dim)?) - lit(2.0);
    let table = FourierTable::<S>::zeros(dim, cutoff)?;
    // Sum smallest terms first.
    let mut terms: Vec<S> = table.wavenumbers_sq().into_iter().map(|k2| (S::one() + k2).powf(-exponent)).collect();
    terms.sort_by(|a, b| a.partial_cmp(b).expect("finite terms"));
    let partial: S = terms.into_iter().sum();
    Ok((partial, partial + tail_sum_bound(exponent, dim, cutoff)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{ParticleCloud, TorusMeasure};
    use num_complex::Complex;
    use std::f64::consts::PI;

    #[test]
    fn n_star_values() {
        assert_eq!(n_star(1).unwrap(), 3);
        assert_eq!(n_star(2).unwrap(), 4);
        assert_eq!(n_star(3).unwrap(), 4);
        assert!(n_star(0).is_err());
    }

    #[test]
    fn summability() {
        assert!(SobolevWeight::new(1.0, 2).unwrap().require_summable().is_err());
        assert!(SobolevWeight::new(1.0, 1).unwrap().require_summable().is_ok());
        assert!(SobolevWeight::new(0.0, 1).is_err());
        let mu = TorusMeasure::dirac(&[0.0, 0.0]).unwrap();
        let w = SobolevWeight::new(1.0, 2).unwrap();
        assert!(matches!(rho_lambda(&mu, &mu, w, 4), Err(Error::NotSummable { .. })));
    }

    #[test]
    fn tail_bound_dominates_brute_force() {
        for &(lambda, dim, k) in &[(3.0, 1, 8), (1.0, 1, 16), (2.0, 2, 5), (4.0, 3, 3), (2.0, 3, 4)] {
            let big = 40;
            let t = FourierTable::<f64>::zeros(dim, big).unwrap();
            let tail: f64 = (0..t.len())
                .filter(|&i| t.wavevector(i).iter().any(|v| v.unsigned_abs() as usize > k))
                .map(|i| {
                    let k2: i64 = t.wavevector(i).iter().map(|v| v * v).sum();
                    (1.0 + k2 as f64).powf(-lambda)
                })
                .sum();
            assert!(tail <= tail_sum_bound(lambda, dim, k), "λ={lambda} d={dim} K={k}");
        }
    }

    #[test]
    fn norm_examples() {
        let w2 = SobolevWeight::new(2.0, 1).unwrap();
        let one = FourierTable::<f64>::from_entries(1, 1, &[(vec![0], Complex::new(1.0, 0.0))]).unwrap();
        assert!((sobolev_norm(&one, w2, 1, None).unwrap().value - 1.0).abs() < 1e-15);
        let w1 = SobolevWeight::new(1.0, 1).unwrap();
        let e1 = FourierTable::<f64>::from_coeffs(1, 2, vec![0.0.into(), 0.0.into(), 0.0.into(), 1.0.into(), 0.0.into()]).unwrap();
        assert!((sobolev_norm(&e1, w1, 2, None).unwrap().value - 2f64.sqrt()).abs() < 1e-15);
        let mut e12 = e1.clone();
        e12.coeffs_mut()[4] = 1.0.into();
        let r = sobolev_norm(&e12, w1, 2, Some(DecayCertificate::TrigPolynomial)).unwrap();
        assert!((r.value - 7f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.truncation_error, 0.0);
        assert!(sobolev_norm(&e12, w1, 2, None).unwrap().truncation_error.is_infinite());
    }

    #[test]
    fn rho_of_antipodal_diracs_against_long_series() {
        let a = TorusMeasure::dirac(&[0.0]).unwrap();
        let b = TorusMeasure::dirac(&[PI]).unwrap();
        let w = SobolevWeight::new(3.0, 1).unwrap();
        let r = rho_lambda(&a, &b, w, 64).unwrap();
        // |F_k(δ_0 - δ_π)|² = (1 - (-1)^k)²/(2π)
        let series: f64 = (1..=1_000_000i64)
            .rev()
            .filter(|k| k % 2 == 1)
            .map(|k| 2.0 * (1.0 + (k * k) as f64).powf(-3.0) * 4.0 / (2.0 * PI))
            .sum();
        assert!((r.value - series.sqrt()).abs() < 1e-6);
        assert!(r.value - r.truncation_error <= series.sqrt() && series.sqrt() <= r.value + r.truncation_error);
        assert_eq!(rho_lambda(&a, &a, w, 8).unwrap().value, 0.0);
        assert_eq!(rho_lambda(&b, &a, w, 64).unwrap().value, r.value);
    }

    #[test]
    fn dual_maximizer_saturates() {
        let a: TorusMeasure<f64> = ParticleCloud::new(1, vec![0.3, 2.0], vec![0.4, 0.6]).unwrap().into();
        let b = TorusMeasure::dirac(&[5.0]).unwrap();
        let w = SobolevWeight::new(3.0, 1).unwrap();
        let eta = fourier_table(&a, 32).unwrap().sub(&fourier_table(&b, 32).unwrap()).unwrap();
        let psi = dual_maximizer(&eta, w).unwrap();
        assert!(!psi.degenerate);
        let norm = sobolev_norm(&psi.function, SobolevWeight::new(3.0, 1).unwrap(), 32, None).unwrap().value;
        let pairing = a.integrate(|x| psi.function.evaluate(x)) - b.integrate(|x| psi.function.evaluate(x));
        let rho = rho_lambda(&a, &b, w, 32).unwrap();
        assert!((pairing / norm - rho.value).abs() < 1e-12);
        let zero = eta.sub(&eta).unwrap();
        let z = dual_maximizer(&zero, w).unwrap();
        assert!(z.degenerate && z.function.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn embedding_constant_values() {
        let c11: f64 = embedding_constant(1, 1).unwrap();
        assert!((c11 - (2.0 * (1.0 + 2.0 * PI)).sqrt()).abs() < 1e-14);
        let c21: f64 = embedding_constant(2, 1).unwrap();
        assert!((c21 - (4.0 * (1.0 + 2.0 * PI)).sqrt()).abs() < 1e-14);
        assert!(c21 >= c11);
        assert!(embedding_constant::<f64>(0, 1).is_err());
    }

    #[test]
    fn tail_constant_brackets_closed_form() {
        let exact = PI / PI.tanh();
        let (lo, hi) = tail_constant_c::<f64>(1, None).unwrap();
        assert!(lo <= exact && exact <= hi);
        let (lo2, hi2) = tail_constant_c::<f64>(1, Some(128)).unwrap();
        assert!((hi2 - lo2) / (hi - lo) <= 0.51);
        for d in 1..=3 {
            assert!(tail_constant_c::<f64>(d, Some(8)).unwrap().0 > 1.0);
        }
    }
}
