use crate::error::{Error, Result};
use crate::metrics::{tail_sum_bound, SobolevWeight};
use crate::scalar::{basis_modulus, lit, Real};
use crate::torus::{fourier_table, Atoms, FourierTable, Jet, TorusMeasure};

use super::family::{CoefficientFamily, Control, ControlDictionary};

/// Scaling of the second-order term of the generator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DiffusionConvention {
    /// `Σ_{ijl} σ_il σ_jl ∂²_ij γ`.
    #[default]
    Bare,
    /// `½ Σ_{ijl} σ_il σ_jl ∂²_ij γ`, the Itô generator of the SDE.
    Half,
}

impl DiffusionConvention {
    pub fn factor<S: Real>(self) -> S {
        match self {
            DiffusionConvention::Bare => S::one(),
            DiffusionConvention::Half => lit(0.5),
        }
    }
}

/// A real function given by Fourier coefficients together with a bound on
/// the `C²` size of everything beyond the stored cutoff:
/// `c2_tail ≥ Σ_{|k|_∞>K} (1+|k|²)|F_k|(2π)^{-d/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothFunction<S> {
    pub table: FourierTable<S>,
    pub c2_tail: S,
}

impl<S: Real> SmoothFunction<S> {
    /// A trigonometric polynomial; nothing lies beyond its cutoff.
    pub fn polynomial(table: FourierTable<S>) -> Self {
        SmoothFunction { table, c2_tail: S::zero() }
    }

    /// Fails unless `c2_tail` is a finite, nonnegative bound.
    pub fn certified(&self) -> Result<()> {
        if self.c2_tail.is_finite() && self.c2_tail >= S::zero() {
            Ok(())
        } else {
            Err(Error::InsufficientDecay(format!("C² tail bound {} is not finite", self.c2_tail)))
        }
    }

    pub fn scaled(&self, s: S) -> Self {
        SmoothFunction { table: self.table.scaled(s), c2_tail: self.c2_tail * s.abs() }
    }

    pub fn combine(&self, a: S, other: &Self, b: S) -> Result<Self> {
        Ok(SmoothFunction { table: self.table.combine(a, &other.table, b)?, c2_tail: a.abs() * self.c2_tail + b.abs() * other.c2_tail })
    }
}

/// Reusable buffers for evaluating coefficients at one point.
pub(crate) struct PointScratch<S> {
    pub a: Vec<S>,
    pub b: Vec<S>,
    pub sigma: Vec<S>,
}

impl<S: Real> PointScratch<S> {
    pub fn new<F: CoefficientFamily<S> + ?Sized>(family: &F) -> Self {
        PointScratch {
            a: vec![S::zero(); family.control_dim()],
            b: vec![S::zero(); family.dim()],
            sigma: vec![S::zero(); family.dim() * family.noise_dim()],
        }
    }
}

/// `b·∇γ + s·Σ σσᵀ : ∇²γ` from a precomputed jet; `scratch.a` must already
/// hold `α(x)`.
pub(crate) fn generator_from_jet<S: Real, F: CoefficientFamily<S> + ?Sized>(
    family: &F,
    x: &[S],
    features: &[S],
    jet: &Jet<S>,
    scratch: &mut PointScratch<S>,
    convention: DiffusionConvention,
) -> S {
    let d = family.dim();
    let dp = family.noise_dim();
    family.drift(x, features, &scratch.a, &mut scratch.b);
    family.volatility(x, features, &scratch.a, &mut scratch.sigma);
    let first: S = scratch.b.iter().zip(&jet.grad).map(|(&b, &g)| b * g).sum();
    let mut second = S::zero();
    for i in 0..d {
        for j in 0..d {
            let cov: S = (0..dp).map(|l| scratch.sigma[i * dp + l] * scratch.sigma[j * dp + l]).sum();
            second += cov * jet.hess[i * d + j];
        }
    }
    first + convention.factor::<S>() * second
}

fn check_family_dims<S: Real, F: CoefficientFamily<S> + ?Sized>(family: &F, gamma: &SmoothFunction<S>, dim: usize) -> Result<()> {
    if gamma.table.dim() != family.dim() || dim != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: gamma.table.dim() });
    }
    Ok(())
}

/// `M^{α,μ}[γ](x) = b(x, μ, α(x))·∇γ(x) + s·Σ_{ijl} σ_il σ_jl ∂²_ij γ(x)`
/// with `s` fixed by `convention`.
pub fn generator_apply<S: Real, F: CoefficientFamily<S> + ?Sized>(
    gamma: &SmoothFunction<S>,
    mu: &Atoms<'_, S>,
    alpha: &Control<S>,
    family: &F,
    x: &[S],
    convention: DiffusionConvention,
) -> Result<S> {
    gamma.certified()?;
    check_family_dims(family, gamma, x.len())?;
    let features = family.features(mu);
    let mut scratch = PointScratch::new(family);
    alpha.eval_into(x, &mut scratch.a);
    Ok(generator_from_jet(family, x, &features, &gamma.table.jet(x), &mut scratch, convention))
}

/// For every dictionary entry, `∫ [ℓ^α(x, cost features) + M^α[γ](x)] dμ(x)`
/// where either part may be left out and the generator reads its own
/// feature vector.
pub(crate) fn dictionary_integrals<S: Real, F: CoefficientFamily<S> + ?Sized>(
    mu: &Atoms<'_, S>,
    cost_features: Option<&[S]>,
    generator: Option<(&FourierTable<S>, &[S])>,
    dict: &ControlDictionary<S>,
    family: &F,
    convention: DiffusionConvention,
) -> Vec<S> {
    let mut scratch = PointScratch::new(family);
    let mut totals = vec![S::zero(); dict.len()];
    for (x, w) in mu.iter() {
        let jet = generator.map(|(g, _)| g.jet(x));
        for (total, alpha) in totals.iter_mut().zip(dict.entries()) {
            alpha.eval_into(x, &mut scratch.a);
            let mut v = S::zero();
            if let (Some(jet), Some((_, gf))) = (&jet, generator) {
                v += generator_from_jet(family, x, gf, jet, &mut scratch, convention);
            }
            if let Some(cf) = cost_features {
                v += family.running_cost(x, cf, &scratch.a);
            }
            *total += w * v;
        }
    }
    totals
}

/// Minimum of the Hamiltonian integrand over a dictionary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianValue<S> {
    pub value: S,
    /// Index of the minimizing entry (lowest index on ties).
    pub argmin: usize,
}

/// `H(μ, γ) = min_{α ∈ dict} μ(ℓ^α(·, μ) + M^{α,μ}[γ])`.
pub fn hamiltonian<S: Real, F: CoefficientFamily<S> + ?Sized>(
    mu: &TorusMeasure<S>,
    gamma: &SmoothFunction<S>,
    dict: &ControlDictionary<S>,
    family: &F,
    convention: DiffusionConvention,
) -> Result<HamiltonianValue<S>> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    gamma.certified()?;
    check_family_dims(family, gamma, mu.dim())?;
    let atoms = mu.atoms();
    let features = family.features(&atoms);
    let totals = dictionary_integrals(&atoms, Some(&features), Some((&gamma.table, &features)), dict, family, convention);
    Ok(argmin(&totals))
}

pub(crate) fn argmin<S: Real>(values: &[S]) -> HamiltonianValue<S> {
    let mut best = HamiltonianValue { value: values[0], argmin: 0 };
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best.value {
            best = HamiltonianValue { value: v, argmin: i };
        }
    }
    best
}

/// Linear derivative of `h = ½ρ_λ²(·, ν)` at `μ` from the two measure
/// tables: `∂_μ h(μ) = Σ_k (1+|k|²)^{-λ} F_k(μ-ν) e_k`.
pub fn linear_derivative_from_tables<S: Real>(
    f_mu: &FourierTable<S>,
    f_nu: &FourierTable<S>,
    weight: SobolevWeight<S>,
) -> Result<SmoothFunction<S>> {
    weight.require_summable()?;
    let eta = f_mu.sub(f_nu)?;
    let w = weight.dual_weights(&eta);
    let coeffs = eta.coeffs().iter().zip(&w).map(|(c, &wk)| c * wk).collect();
    let table = FourierTable::from_coeffs(eta.dim(), eta.cutoff(), coeffs)?;
    // |F_k(μ-ν)| ≤ 2(2π)^{-d/2}, so the tail is at most
    // 2(2π)^{-d}·Σ_{|k|>K}(1+|k|²)^{1-λ}.
    let m = basis_modulus::<S>(eta.dim());
    let c2_tail = lit::<S>(2.0) * m * m * tail_sum_bound(weight.lambda() - S::one(), eta.dim(), eta.cutoff());
    Ok(SmoothFunction { table, c2_tail })
}

/// `∂_μ[½ρ_λ²(·, ν)](μ)`, truncated at `|k|_∞ ≤ K`.
pub fn linear_derivative_rho_sq<S: Real>(
    mu: &TorusMeasure<S>,
    nu: &TorusMeasure<S>,
    weight: SobolevWeight<S>,
    cutoff: usize,
) -> Result<SmoothFunction<S>> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    linear_derivative_from_tables(&fourier_table(mu, cutoff)?, &fourier_table(nu, cutoff)?, weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::family::MomentFamily;
    use crate::torus::ParticleCloud;
    use num_complex::Complex;
    use std::f64::consts::PI;

    fn diffusion(sigma: f64) -> MomentFamily<f64> {
        MomentFamily { sigma: vec![sigma], ..MomentFamily::zero(1) }
    }

    #[test]
    fn constant_gamma_is_annihilated() {
        let g = SmoothFunction::polynomial(FourierTable::constant(1, 3.0).unwrap());
        let mu = ParticleCloud::dirac(&[0.4]).unwrap();
        let fam = MomentFamily { control_gain: 1.0, ..diffusion(2.0) };
        let v = generator_apply(&g, &mu.atoms(), &Control::Constant(vec![1.5]), &fam, &[0.4], DiffusionConvention::Bare).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn cosine_second_derivative_per_convention() {
        // e_1 + e_{-1} = (2/√(2π))·cos x, whose second derivative at 0 is -2/√(2π).
        let t = FourierTable::from_entries(1, 1, &[(vec![1], Complex::new(1.0, 0.0))]).unwrap();
        let g = SmoothFunction::polynomial(t);
        let mu = ParticleCloud::dirac(&[0.0]).unwrap();
        let a = Control::Constant(vec![0.0]);
        let bare = generator_apply(&g, &mu.atoms(), &a, &diffusion(1.0), &[0.0], DiffusionConvention::Bare).unwrap();
        let half = generator_apply(&g, &mu.atoms(), &a, &diffusion(1.0), &[0.0], DiffusionConvention::Half).unwrap();
        let expect = -2.0 / (2.0 * PI).sqrt();
        assert!((bare - expect).abs() < 1e-14);
        assert!((half - expect / 2.0).abs() < 1e-14);
    }

    #[test]
    fn uncertified_gamma_rejected() {
        let g = SmoothFunction { table: FourierTable::constant(1, 1.0).unwrap(), c2_tail: f64::INFINITY };
        let mu = ParticleCloud::dirac(&[0.0]).unwrap();
        let r = generator_apply(&g, &mu.atoms(), &Control::Constant(vec![0.0]), &diffusion(1.0), &[0.0], DiffusionConvention::Bare);
        assert!(matches!(r, Err(Error::InsufficientDecay(_))));
    }

    #[test]
    fn hamiltonian_trivial_cases() {
        let g = SmoothFunction::polynomial(FourierTable::cosine(1, &[2], 1.0).unwrap());
        let mu: TorusMeasure<f64> = ParticleCloud::new(1, vec![0.1, 2.0], vec![0.5, 0.5]).unwrap().into();
        let zero = MomentFamily::zero(1);
        let dict = ControlDictionary::constants(&[-1.0, 0.0, 1.0]);
        assert_eq!(hamiltonian(&mu, &g, &dict, &zero, DiffusionConvention::Bare).unwrap().value, 0.0);
        let empty = ControlDictionary::constants(&[]);
        assert!(matches!(hamiltonian(&mu, &g, &empty, &zero, DiffusionConvention::Bare), Err(Error::EmptyDictionary)));
    }

    #[test]
    fn derivative_of_equal_measures_vanishes() {
        let mu: TorusMeasure<f64> = ParticleCloud::new(1, vec![0.1, 2.0], vec![0.5, 0.5]).unwrap().into();
        let w = SobolevWeight::new(3.0, 1).unwrap();
        let d = linear_derivative_rho_sq(&mu, &mu, w, 8).unwrap();
        assert!(d.table.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(d.c2_tail.is_finite());
    }
}
