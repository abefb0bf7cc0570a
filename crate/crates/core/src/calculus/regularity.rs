use crate::error::{Error, Result};
use crate::metrics::{rho_lambda, SobolevWeight};
use crate::scalar::{count, lit, two_pi, Real};
use crate::torus::TorusMeasure;

use super::family::{CoefficientFamily, ControlDictionary};

/// Sampled evidence for the declared regularity constant of a family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityReport<S> {
    /// Largest `sup|h| + Σ_a sup|∂_a h| + Σ_a sup|∂²_aa h|` over coefficient
    /// components, estimated by central differences on the grid.
    pub smoothness: S,
    /// Largest `|h(x, μ, α(x)) - h(x, ν, α(x))| / ρ_{n_*}(μ, ν)`.
    pub lipschitz: S,
    /// Pairs skipped because `ρ` was within ten truncation errors of zero.
    pub skipped_pairs: usize,
    pub declared: S,
}

impl<S: Real> RegularityReport<S> {
    pub fn smooth_ok(&self) -> bool {
        self.smoothness <= self.declared
    }

    pub fn lipschitz_ok(&self) -> bool {
        self.lipschitz <= self.declared
    }
}

fn components<S: Real, F: CoefficientFamily<S> + ?Sized>(family: &F, x: &[S], features: &[S], a: &[S], out: &mut Vec<S>) {
    let d = family.dim();
    let mut b = vec![S::zero(); d];
    let mut sigma = vec![S::zero(); d * family.noise_dim()];
    family.drift(x, features, a, &mut b);
    family.volatility(x, features, a, &mut sigma);
    out.clear();
    out.extend_from_slice(&b);
    out.extend_from_slice(&sigma);
    out.push(family.running_cost(x, features, a));
}

/// Checks a family against its declared constant on an `n^d` grid of
/// states, for every measure appearing in `pairs` and every dictionary
/// entry, with the metric truncated at `cutoff`.
pub fn validate_regularity<S: Real, F: CoefficientFamily<S> + ?Sized>(
    family: &F,
    dict: &ControlDictionary<S>,
    pairs: &[(TorusMeasure<S>, TorusMeasure<S>)],
    grid: usize,
    cutoff: usize,
) -> Result<RegularityReport<S>> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if grid < 3 {
        return Err(Error::InvalidArgument("regularity grid needs at least 3 points per axis".into()));
    }
    let d = family.dim();
    let weight = SobolevWeight::star(d)?;
    let h = two_pi::<S>() / count(grid);
    let points = grid.pow(d as u32);
    let mut a = vec![S::zero(); family.control_dim()];
    let (mut v0, mut vp, mut vm) = (Vec::new(), Vec::new(), Vec::new());
    let mut smoothness = S::zero();
    let mut lipschitz = S::zero();
    let mut skipped = 0;
    let mut x = vec![S::zero(); d];
    let mut shifted = vec![S::zero(); d];

    for (mu, nu) in pairs {
        let fm = family.features(&mu.atoms());
        let fnu = family.features(&nu.atoms());
        let rho = rho_lambda(mu, nu, weight, cutoff)?;
        let use_pair = rho.value > lit::<S>(10.0) * rho.truncation_error;
        if !use_pair {
            skipped += 1;
        }
        for alpha in dict.entries() {
            for features in [&fm, &fnu] {
                // sup norms per component: value, first and second differences.
                let mut sups: Vec<S> = Vec::new();
                for p in 0..points {
                    let mut r = p;
                    for ax in (0..d).rev() {
                        x[ax] = count::<S>(r % grid) * h;
                        r /= grid;
                    }
                    alpha.eval_into(&x, &mut a);
                    components(family, &x, features, &a, &mut v0);
                    if sups.is_empty() {
                        sups = vec![S::zero(); v0.len() * (1 + 2 * d)];
                    }
                    let nc = v0.len();
                    for (c, v) in v0.iter().enumerate() {
                        sups[c] = sups[c].max(v.abs());
                    }
                    for ax in 0..d {
                        shifted.copy_from_slice(&x);
                        shifted[ax] = x[ax] + h;
                        alpha.eval_into(&shifted, &mut a);
                        components(family, &shifted, features, &a, &mut vp);
                        shifted[ax] = x[ax] - h;
                        alpha.eval_into(&shifted, &mut a);
                        components(family, &shifted, features, &a, &mut vm);
                        for c in 0..nc {
                            let first = (vp[c] - vm[c]) / (lit::<S>(2.0) * h);
                            let second = (vp[c] - lit::<S>(2.0) * v0[c] + vm[c]) / (h * h);
                            sups[nc * (1 + ax) + c] = sups[nc * (1 + ax) + c].max(first.abs());
                            sups[nc * (1 + d + ax) + c] = sups[nc * (1 + d + ax) + c].max(second.abs());
                        }
                    }
                }
                let nc = sups.len() / (1 + 2 * d);
                for c in 0..nc {
                    let total: S = (0..1 + 2 * d).map(|blk| sups[blk * nc + c]).sum();
                    smoothness = smoothness.max(total);
                }
            }
            if use_pair {
                for p in 0..points {
                    let mut r = p;
                    for ax in (0..d).rev() {
                        x[ax] = count::<S>(r % grid) * h;
                        r /= grid;
                    }
                    alpha.eval_into(&x, &mut a);
                    components(family, &x, &fm, &a, &mut vp);
                    components(family, &x, &fnu, &a, &mut vm);
                    for (p1, p2) in vp.iter().zip(&vm) {
                        lipschitz = lipschitz.max((*p1 - *p2).abs() / rho.value);
                    }
                }
            }
        }
    }
    Ok(RegularityReport { smoothness, lipschitz, skipped_pairs: skipped, declared: family.regularity_bound() })
}
