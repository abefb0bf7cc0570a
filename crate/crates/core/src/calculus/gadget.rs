use crate::error::{Error, Result};
use crate::metrics::{rho_from_tables, MetricResult, SobolevWeight};
use crate::scalar::{lit, Real};
use crate::torus::{fourier_table, FourierTable, TorusMeasure};

use super::family::{CoefficientFamily, ControlDictionary};
use super::generator::{argmin, dictionary_integrals, linear_derivative_from_tables, DiffusionConvention, SmoothFunction};

/// Anchors of the doubled-variables penalty
/// `(1/2ε)[ρ²(μ, ν) + (t - s)²]`.
#[derive(Clone, Debug)]
pub struct TestFunctionGadget<S> {
    pub mu: TorusMeasure<S>,
    pub nu: TorusMeasure<S>,
    pub t: S,
    pub s: S,
    pub epsilon: S,
    pub weight: SobolevWeight<S>,
    pub cutoff: usize,
    f_mu: FourierTable<S>,
    f_nu: FourierTable<S>,
}

impl<S: Real> TestFunctionGadget<S> {
    /// Gadget with order `λ = n_*(d)`.
    pub fn new(mu: TorusMeasure<S>, nu: TorusMeasure<S>, t: S, s: S, epsilon: S, cutoff: usize) -> Result<Self> {
        let weight = SobolevWeight::star(mu.dim())?;
        Self::with_weight(mu, nu, t, s, epsilon, weight, cutoff)
    }

    pub fn with_weight(
        mu: TorusMeasure<S>,
        nu: TorusMeasure<S>,
        t: S,
        s: S,
        epsilon: S,
        weight: SobolevWeight<S>,
        cutoff: usize,
    ) -> Result<Self> {
        if !(epsilon > S::zero()) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
        }
        if mu.dim() != nu.dim() || mu.dim() != weight.dim() {
            return Err(Error::DimensionMismatch { expected: weight.dim(), found: mu.dim().max(nu.dim()) });
        }
        weight.require_summable()?;
        let f_mu = fourier_table(&mu, cutoff)?;
        let f_nu = fourier_table(&nu, cutoff)?;
        Ok(TestFunctionGadget { mu, nu, t, s, epsilon, weight, cutoff, f_mu, f_nu })
    }

    /// `ρ_λ(μ_ε, ν_ε)`.
    pub fn rho(&self) -> Result<MetricResult<S>> {
        rho_from_tables(&self.f_mu, &self.f_nu, self.weight)
    }

    fn penalty(&self, rho_sq: S, dt: S) -> S {
        (rho_sq + dt * dt) / (lit::<S>(2.0) * self.epsilon)
    }

    /// `ψ_ε(t, μ) = (1/2ε)[ρ²(μ, ν_ε) + (t - s_ε)²]`.
    pub fn psi(&self, t: S, mu: &TorusMeasure<S>) -> Result<S> {
        let r = rho_from_tables(&fourier_table(mu, self.cutoff)?, &self.f_nu, self.weight)?.value;
        Ok(self.penalty(r * r, t - self.s))
    }

    /// `φ_ε(s, ν) = -(1/2ε)[ρ²(μ_ε, ν) + (t_ε - s)²]`.
    pub fn phi(&self, s: S, nu: &TorusMeasure<S>) -> Result<S> {
        let r = rho_from_tables(&self.f_mu, &fourier_table(nu, self.cutoff)?, self.weight)?.value;
        Ok(-self.penalty(r * r, self.t - s))
    }
}

/// `κ_ε = ∂_μψ_ε(t_ε, μ_ε) = (1/ε)·∂_μ[½ρ²(·, ν_ε)](μ_ε)`.
pub fn kappa_epsilon<S: Real>(gadget: &TestFunctionGadget<S>) -> Result<SmoothFunction<S>> {
    let d = linear_derivative_from_tables(&gadget.f_mu, &gadget.f_nu, gadget.weight)?;
    Ok(d.scaled(S::one() / gadget.epsilon))
}

/// `Φ_ε = u(t_ε, μ_ε) - w(s_ε, ν_ε) - (1/2ε)[ρ²(μ_ε, ν_ε) + (t_ε - s_ε)²]`.
pub fn doubling_functional<S, U, W>(u: U, w: W, gadget: &TestFunctionGadget<S>) -> Result<S>
where
    S: Real,
    U: Fn(S, &TorusMeasure<S>) -> S,
    W: Fn(S, &TorusMeasure<S>) -> S,
{
    let r = gadget.rho()?.value;
    Ok(u(gadget.t, &gadget.mu) - w(gadget.s, &gadget.nu) - gadget.penalty(r * r, gadget.t - gadget.s))
}

/// The three terms bounding `|H(μ_ε, κ_ε) - H(ν_ε, κ_ε)|`, each maximized
/// over the dictionary:
///
/// ```text
/// T^α = |μ(ℓ^α(·, μ)) - ν(ℓ^α(·, ν))|
/// I^α = |(μ - ν)(M^{α,μ}[κ])|
/// J^α = |ν(M^{α,μ}[κ] - M^{α,ν}[κ])|
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianSplit<S> {
    pub h_mu: S,
    pub h_nu: S,
    pub sup_t: S,
    pub sup_i: S,
    pub sup_j: S,
}

impl<S: Real> HamiltonianSplit<S> {
    pub fn difference(&self) -> S {
        (self.h_mu - self.h_nu).abs()
    }

    /// `|ΔH| ≤ sup T + sup I + sup J` up to a relative rounding allowance.
    pub fn bound_holds(&self) -> bool {
        let bound = self.sup_t + self.sup_i + self.sup_j;
        self.difference() <= bound + lit::<S>(1e-12) * (S::one() + bound + self.h_mu.abs() + self.h_nu.abs())
    }
}

pub fn hamiltonian_split<S: Real, F: CoefficientFamily<S> + ?Sized>(
    gadget: &TestFunctionGadget<S>,
    dict: &ControlDictionary<S>,
    family: &F,
    convention: DiffusionConvention,
) -> Result<HamiltonianSplit<S>> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let kappa = kappa_epsilon(gadget)?;
    kappa.certified()?;
    let (am, an) = (gadget.mu.atoms(), gadget.nu.atoms());
    let (fm, fn_) = (family.features(&am), family.features(&an));
    let k = &kappa.table;
    let cost_mu = dictionary_integrals(&am, Some(&fm), None, dict, family, convention);
    let cost_nu = dictionary_integrals(&an, Some(&fn_), None, dict, family, convention);
    let gen_mu_on_mu = dictionary_integrals(&am, None, Some((k, &fm)), dict, family, convention);
    let gen_mu_on_nu = dictionary_integrals(&an, None, Some((k, &fm)), dict, family, convention);
    let gen_nu_on_nu = dictionary_integrals(&an, None, Some((k, &fn_)), dict, family, convention);
    let h_mu: Vec<S> = cost_mu.iter().zip(&gen_mu_on_mu).map(|(a, b)| *a + *b).collect();
    let h_nu: Vec<S> = cost_nu.iter().zip(&gen_nu_on_nu).map(|(a, b)| *a + *b).collect();
    let sup = |v: Vec<S>| v.into_iter().fold(S::zero(), S::max);
    Ok(HamiltonianSplit {
        h_mu: argmin(&h_mu).value,
        h_nu: argmin(&h_nu).value,
        sup_t: sup(cost_mu.iter().zip(&cost_nu).map(|(a, b)| (*a - *b).abs()).collect()),
        sup_i: sup(gen_mu_on_mu.iter().zip(&gen_mu_on_nu).map(|(a, b)| (*a - *b).abs()).collect()),
        sup_j: sup(gen_mu_on_nu.iter().zip(&gen_nu_on_nu).map(|(a, b)| (*a - *b).abs()).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::generator::linear_derivative_rho_sq;
    use crate::torus::ParticleCloud;
    use std::f64::consts::PI;

    fn pair() -> (TorusMeasure<f64>, TorusMeasure<f64>) {
        (TorusMeasure::dirac(&[0.0]).unwrap(), TorusMeasure::dirac(&[PI]).unwrap())
    }

    #[test]
    fn kappa_scales_inversely_with_epsilon() {
        let (a, b) = pair();
        let g1 = TestFunctionGadget::new(a.clone(), b.clone(), 0.0, 0.0, 0.1, 16).unwrap();
        let g2 = TestFunctionGadget::new(a.clone(), b.clone(), 0.0, 0.0, 0.05, 16).unwrap();
        let (k1, k2) = (kappa_epsilon(&g1).unwrap(), kappa_epsilon(&g2).unwrap());
        for (x, y) in k1.table.coeffs().iter().zip(k2.table.coeffs()) {
            assert!((x * 2.0 - y).norm() < 1e-15);
        }
        // k = 1 entry: 10·2^{-3}·F_1(δ_0 - δ_π) = 10/8·2/√(2π)
        let c1 = k1.table.get(&[1]).unwrap();
        assert!((c1.re - 10.0 / 8.0 * 2.0 / (2.0 * PI).sqrt()).abs() < 1e-13);
        let direct = linear_derivative_rho_sq(&a, &b, SobolevWeight::new(3.0, 1).unwrap(), 16).unwrap();
        assert!((direct.table.get(&[1]).unwrap() * 10.0 - c1).norm() < 1e-14);
        let same = TestFunctionGadget::new(a.clone(), a, 0.0, 0.0, 0.1, 16).unwrap();
        assert!(kappa_epsilon(&same).unwrap().table.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn doubling_examples() {
        let (a, b) = pair();
        let same = TestFunctionGadget::new(a.clone(), a.clone(), 0.3, 0.3, 1.0, 16).unwrap();
        assert_eq!(doubling_functional(|_, _| 0.7, |_, _| 0.7, &same).unwrap(), 0.0);
        let g = TestFunctionGadget::new(a.clone(), b.clone(), 0.0, 0.0, 1.0, 64).unwrap();
        let r = g.rho().unwrap().value;
        let phi = doubling_functional(|_, _| 1.0, |_, _| 0.0, &g).unwrap();
        assert!((phi - (1.0 - 0.5 * r * r)).abs() < 1e-15);
        let tight = TestFunctionGadget::new(a, b, 0.0, 0.0, 0.5, 64).unwrap();
        assert!(doubling_functional(|_, _| 1.0, |_, _| 0.0, &tight).unwrap() < phi);
    }

    #[test]
    fn psi_and_phi_vanish_at_anchor_when_measures_agree() {
        let (a, _) = pair();
        let g = TestFunctionGadget::new(a.clone(), a.clone(), 0.2, 0.2, 0.3, 8).unwrap();
        assert_eq!(g.psi(0.2, &a).unwrap(), 0.0);
        assert_eq!(g.phi(0.2, &a).unwrap(), 0.0);
        let c = ParticleCloud::new(1, vec![1.0, 2.0], vec![0.5, 0.5]).unwrap().into();
        assert!(g.psi(0.2, &c).unwrap() > 0.0);
    }
}
