use crate::error::{Error, Result};
use crate::metrics::n_star;
use crate::scalar::{count, lit, Real};
use crate::torus::{lift_mean, Atoms, FourierTable};
use crate::value::PeriodicLookup;

/// A feedback map `α: T^d → A ⊂ R^m`.
#[derive(Clone, Debug, PartialEq)]
pub enum Control<S> {
    Constant(Vec<S>),
    /// One real function per control component.
    Feedback(Vec<FourierTable<S>>),
}

impl<S: Real> Control<S> {
    pub fn control_dim(&self) -> usize {
        match self {
            Control::Constant(a) => a.len(),
            Control::Feedback(f) => f.len(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Control::Constant(_))
    }

    #[inline]
    pub fn eval_into(&self, x: &[S], out: &mut [S]) {
        match self {
            Control::Constant(a) => out.copy_from_slice(a),
            Control::Feedback(f) => {
                for (o, t) in out.iter_mut().zip(f) {
                    *o = t.evaluate(x);
                }
            }
        }
    }

    /// Upper bound on `Σ_{|β| ≤ n} sup|∂^β α|`, summed over components.
    pub fn smoothness_bound(&self, order: usize) -> S {
        match self {
            Control::Constant(a) => a.iter().map(|v| v.abs()).sum(),
            Control::Feedback(f) => {
                // sup|∂^β f| ≤ Σ |k|^{|β|} |c_k| (2π)^{-d/2}; summing over
                // |β| ≤ n is dominated by (n+1)·(1+|k|²)^{n/2}·multiplicity.
                let dim = f.first().map(|t| t.dim()).unwrap_or(1);
                let multiplicity = count::<S>(dim.pow(order as u32) * (order + 1));
                f.iter().map(|t| t.weighted_l1(count(order)) * multiplicity).sum()
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Control::Constant(a) => {
                let parts: Vec<String> = a.iter().map(|v| v.to_string()).collect();
                format!("const({})", parts.join(","))
            }
            Control::Feedback(f) => format!("feedback(K={})", f.first().map(|t| t.cutoff()).unwrap_or(0)),
        }
    }
}

/// A finite set of feedback maps standing in for the control set.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlDictionary<S> {
    entries: Vec<Control<S>>,
    c0: S,
}

impl<S: Real> ControlDictionary<S> {
    /// Validates that every entry has the same control dimension and a
    /// `C^{n_*}` bound of at most `c0`.
    pub fn new(entries: Vec<Control<S>>, c0: S, state_dim: usize) -> Result<Self> {
        let order = n_star(state_dim)?;
        if let Some(first) = entries.first() {
            let m = first.control_dim();
            for e in &entries {
                if e.control_dim() != m {
                    return Err(Error::DimensionMismatch { expected: m, found: e.control_dim() });
                }
                if let Control::Feedback(f) = e {
                    if let Some(t) = f.iter().find(|t| t.dim() != state_dim) {
                        return Err(Error::DimensionMismatch { expected: state_dim, found: t.dim() });
                    }
                }
                let bound = e.smoothness_bound(order);
                if !(bound <= c0) {
                    return Err(Error::InvalidArgument(format!(
                        "control {} has C^{order} bound {bound} above c0 = {c0}",
                        e.label()
                    )));
                }
            }
        }
        Ok(ControlDictionary { entries, c0 })
    }

    /// Scalar constant controls; `c0` is the largest magnitude.
    pub fn constants(values: &[S]) -> Self {
        let c0 = values.iter().map(|v| v.abs()).fold(S::zero(), S::max);
        ControlDictionary { entries: values.iter().map(|&a| Control::Constant(vec![a])).collect(), c0 }
    }

    /// `n` equally spaced scalar constants on `[lo, hi]`.
    pub fn constant_grid(lo: S, hi: S, n: usize) -> Self {
        let values: Vec<S> = if n <= 1 {
            vec![(lo + hi) / lit(2.0)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * count::<S>(i) / count::<S>(n - 1)).collect()
        };
        Self::constants(&values)
    }

    pub fn entries(&self) -> &[Control<S>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn c0(&self) -> S {
        self.c0
    }

    /// This dictionary with `others` appended.
    pub fn union(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        ControlDictionary { entries, c0: self.c0.max(other.c0) }
    }
}

/// Drift, volatility and costs of a controlled mean-field problem.
///
/// The law enters only through `features(μ)`, a finite vector of summary
/// statistics computed once per time step.
pub trait CoefficientFamily<S: Real>: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn control_dim(&self) -> usize;

    fn features(&self, mu: &Atoms<'_, S>) -> Vec<S>;

    /// Whether drift or volatility read the features.
    fn dynamics_depend_on_law(&self) -> bool;

    /// Writes `b(x, μ, a)` into `out` (length `d`).
    fn drift(&self, x: &[S], features: &[S], a: &[S], out: &mut [S]);

    /// Writes `σ(x, μ, a)` row-major into `out` (`d × d'`).
    fn volatility(&self, x: &[S], features: &[S], a: &[S], out: &mut [S]);

    fn running_cost(&self, x: &[S], features: &[S], a: &[S]) -> S;

    fn terminal_cost(&self, mu: &Atoms<'_, S>) -> S;

    /// A lower bound on `ℓ` over all states, laws and controls, if known.
    fn running_cost_floor(&self) -> Option<S> {
        None
    }

    /// A lower bound on `φ`, if known.
    fn terminal_cost_floor(&self) -> Option<S> {
        None
    }

    /// Declared constant `c_a` bounding the coefficients in `C^{n_*}` and
    /// their Lipschitz dependence on the law.
    fn regularity_bound(&self) -> S;
}

/// Coefficients depending on the law through moments `μ(f_1), …, μ(f_m)`:
///
/// ```text
/// b(x, μ, a)  = g·a + b₀(x) + B·(μ(f_j))_j
/// σ           = constant d×d' matrix
/// ℓ(x, μ, a)  = ½q|a|² + h(x) + c + Σ_j c_j μ(f_j) + Σ_j q_j μ(f_j)²
/// φ(μ)        = c' + Σ_j c'_j μ(f_j) + Σ_j q'_j μ(f_j)²
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct MomentFamily<S> {
    pub name: String,
    pub dim: usize,
    pub noise_dim: usize,
    pub control_dim: usize,
    pub moments: Vec<FourierTable<S>>,
    /// `g`; requires `control_dim == dim` when nonzero.
    pub control_gain: S,
    /// `b₀`, empty or one table per coordinate.
    pub drift_field: Vec<FourierTable<S>>,
    /// `B`, empty or `dim × moments.len()` row-major.
    pub drift_moments: Vec<S>,
    pub sigma: Vec<S>,
    pub control_cost: S,
    pub state_cost: Option<FourierTable<S>>,
    pub cost_constant: S,
    pub cost_linear: Vec<S>,
    pub cost_quadratic: Vec<S>,
    pub terminal_constant: S,
    pub terminal_linear: Vec<S>,
    pub terminal_quadratic: Vec<S>,
    pub regularity: S,
}

impl<S: Real> MomentFamily<S> {
    /// No drift, no noise, no cost.
    pub fn zero(dim: usize) -> Self {
        MomentFamily {
            name: "zero".into(),
            dim,
            noise_dim: dim,
            control_dim: dim,
            moments: Vec::new(),
            control_gain: S::zero(),
            drift_field: Vec::new(),
            drift_moments: Vec::new(),
            sigma: vec![S::zero(); dim * dim],
            control_cost: S::zero(),
            state_cost: None,
            cost_constant: S::zero(),
            cost_linear: Vec::new(),
            cost_quadratic: Vec::new(),
            terminal_constant: S::zero(),
            terminal_linear: Vec::new(),
            terminal_quadratic: Vec::new(),
            regularity: S::one(),
        }
    }

    /// Frozen dynamics (`b ≡ 0`, `σ ≡ 0`) with running cost `ℓ ≡ c`.
    pub fn frozen(dim: usize, running_cost: S) -> Self {
        MomentFamily { name: "frozen".into(), cost_constant: running_cost, regularity: S::one() + running_cost.abs(), ..Self::zero(dim) }
    }

    /// `d = 1`, `b = a`, `σ` constant,
    /// `ℓ = ½a² + κ[1 - μ(cos)² - μ(sin)²]`.
    pub fn kuramoto(kappa: S, sigma: S) -> Result<Self> {
        let family = MomentFamily {
            name: "kuramoto".into(),
            moments: vec![FourierTable::cosine(1, &[1], S::one())?, FourierTable::sine(1, &[1], S::one())?],
            control_gain: S::one(),
            sigma: vec![sigma],
            control_cost: S::one(),
            cost_constant: kappa,
            cost_linear: vec![S::zero(), S::zero()],
            cost_quadratic: vec![-kappa, -kappa],
            // |Δ(μ(cos)² + μ(sin)²)| ≤ 2(|Δμ(cos)| + |Δμ(sin)|) and
            // ‖cos‖_3 = ‖sin‖_3 = (8π)^{1/2}.
            regularity: S::one() + sigma.abs() + lit::<S>(4.0) * kappa.abs() * (lit::<S>(8.0) * S::PI()).sqrt(),
            ..Self::zero(1)
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.moments.len();
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::InvalidArgument(format!("moment family `{}`: {what}", self.name))) };
        crate::torus::point::check_dim(self.dim)?;
        check(self.moments.iter().all(|f| f.dim() == self.dim), "moment dimension")?;
        check(self.control_gain == S::zero() || self.control_dim == self.dim, "control gain needs control_dim == dim")?;
        check(self.drift_field.is_empty() || self.drift_field.len() == self.dim, "drift field length")?;
        check(self.drift_field.iter().all(|f| f.dim() == self.dim), "drift field dimension")?;
        check(self.drift_moments.is_empty() || self.drift_moments.len() == self.dim * m, "drift moment matrix shape")?;
        check(self.sigma.len() == self.dim * self.noise_dim, "sigma shape")?;
        check(self.state_cost.as_ref().map_or(true, |f| f.dim() == self.dim), "state cost dimension")?;
        for v in [&self.cost_linear, &self.cost_quadratic, &self.terminal_linear, &self.terminal_quadratic] {
            check(v.is_empty() || v.len() == m, "moment coefficient length")?;
        }
        Ok(())
    }

    fn moment_terms(lin: &[S], quad: &[S], features: &[S]) -> S {
        let l: S = lin.iter().zip(features).map(|(&c, &f)| c * f).sum();
        let q: S = quad.iter().zip(features).map(|(&c, &f)| c * f * f).sum();
        l + q
    }

    fn moment_floor(&self, lin: &[S], quad: &[S]) -> S {
        let mut floor = S::zero();
        for (j, f) in self.moments.iter().enumerate() {
            let b = f.weighted_l1(S::zero());
            let c = lin.get(j).copied().unwrap_or_else(S::zero);
            let q = quad.get(j).copied().unwrap_or_else(S::zero);
            floor -= c.abs() * b;
            if q < S::zero() {
                floor += q * b * b;
            }
        }
        floor
    }
}

impl<S: Real> CoefficientFamily<S> for MomentFamily<S> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    fn control_dim(&self) -> usize {
        self.control_dim
    }

    fn features(&self, mu: &Atoms<'_, S>) -> Vec<S> {
        self.moments.iter().map(|f| mu.integrate(|x| f.evaluate(x))).collect()
    }

    fn dynamics_depend_on_law(&self) -> bool {
        self.drift_moments.iter().any(|&v| v != S::zero())
    }

    fn drift(&self, x: &[S], features: &[S], a: &[S], out: &mut [S]) {
        let m = self.moments.len();
        for i in 0..self.dim {
            let mut b = if self.control_gain != S::zero() { self.control_gain * a[i] } else { S::zero() };
            if let Some(f) = self.drift_field.get(i) {
                b += f.evaluate(x);
            }
            if !self.drift_moments.is_empty() {
                b += self.drift_moments[i * m..(i + 1) * m].iter().zip(features).map(|(&c, &f)| c * f).sum::<S>();
            }
            out[i] = b;
        }
    }

    fn volatility(&self, _x: &[S], _features: &[S], _a: &[S], out: &mut [S]) {
        out.copy_from_slice(&self.sigma);
    }

    fn running_cost(&self, x: &[S], features: &[S], a: &[S]) -> S {
        let mut c = self.cost_constant + Self::moment_terms(&self.cost_linear, &self.cost_quadratic, features);
        if self.control_cost != S::zero() {
            c += self.control_cost * a.iter().map(|&v| v * v).sum::<S>() / lit(2.0);
        }
        if let Some(g) = &self.state_cost {
            c += g.evaluate(x);
        }
        c
    }

    fn terminal_cost(&self, mu: &Atoms<'_, S>) -> S {
        if self.terminal_linear.is_empty() && self.terminal_quadratic.is_empty() {
            return self.terminal_constant;
        }
        let features = self.features(mu);
        self.terminal_constant + Self::moment_terms(&self.terminal_linear, &self.terminal_quadratic, &features)
    }

    fn running_cost_floor(&self) -> Option<S> {
        if self.control_cost < S::zero() {
            return None;
        }
        let state = self.state_cost.as_ref().map_or(S::zero(), |g| g.weighted_l1(S::zero()));
        Some(self.cost_constant - state + self.moment_floor(&self.cost_linear, &self.cost_quadratic))
    }

    fn terminal_cost_floor(&self) -> Option<S> {
        Some(self.terminal_constant + self.moment_floor(&self.terminal_linear, &self.terminal_quadratic))
    }

    fn regularity_bound(&self) -> S {
        self.regularity
    }
}

/// The one-dimensional example with `b = a`, constant `σ`, `φ ≡ 0` and
/// `ℓ(μ, a) = ½a² + L(m(μ))`, where `m(μ)` is the lifted mean.
#[derive(Clone, Debug, PartialEq)]
pub struct EikonalFamily<S> {
    pub potential: PeriodicLookup<S>,
    pub sigma: S,
}

impl<S: Real> EikonalFamily<S> {
    pub fn new(potential: PeriodicLookup<S>, sigma: S) -> Self {
        EikonalFamily { potential, sigma }
    }
}

impl<S: Real> CoefficientFamily<S> for EikonalFamily<S> {
    fn name(&self) -> &str {
        "eikonal"
    }

    fn dim(&self) -> usize {
        1
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn features(&self, mu: &Atoms<'_, S>) -> Vec<S> {
        vec![lift_mean(mu).expect("family is one-dimensional").mean]
    }

    fn dynamics_depend_on_law(&self) -> bool {
        false
    }

    fn drift(&self, _x: &[S], _features: &[S], a: &[S], out: &mut [S]) {
        out[0] = a[0];
    }

    fn volatility(&self, _x: &[S], _features: &[S], _a: &[S], out: &mut [S]) {
        out[0] = self.sigma;
    }

    fn running_cost(&self, _x: &[S], features: &[S], a: &[S]) -> S {
        a[0] * a[0] / lit(2.0) + self.potential.eval(features[0])
    }

    fn terminal_cost(&self, _mu: &Atoms<'_, S>) -> S {
        S::zero()
    }

    fn running_cost_floor(&self) -> Option<S> {
        Some(self.potential.min_value())
    }

    fn terminal_cost_floor(&self) -> Option<S> {
        Some(S::zero())
    }

    fn regularity_bound(&self) -> S {
        S::one() + self.sigma.abs() + self.potential.max_abs() + self.potential.lipschitz()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ParticleCloud;

    #[test]
    fn dictionary_validates_bounds() {
        let wiggle = Control::Feedback(vec![FourierTable::<f64>::sine(1, &[1], 0.5).unwrap()]);
        assert!(ControlDictionary::new(vec![Control::Constant(vec![1.0]), wiggle.clone()], 100.0, 1).is_ok());
        assert!(ControlDictionary::new(vec![wiggle], 0.1, 1).is_err());
        assert!(ControlDictionary::new(vec![Control::Constant(vec![1.0]), Control::Constant(vec![1.0, 2.0])], 10.0, 1).is_err());
    }

    #[test]
    fn constant_grid_endpoints() {
        let d = ControlDictionary::<f64>::constant_grid(-2.0, 2.0, 9);
        assert_eq!(d.len(), 9);
        assert_eq!(d.entries()[4], Control::Constant(vec![0.0]));
        assert_eq!(d.c0(), 2.0);
    }

    #[test]
    fn kuramoto_cost_vanishes_at_synchrony() {
        let k = MomentFamily::<f64>::kuramoto(2.0, 0.5).unwrap();
        let sync = ParticleCloud::dirac(&[1.0]).unwrap();
        let f = k.features(&sync.atoms());
        assert!(k.running_cost(&[1.0], &f, &[0.0]).abs() < 1e-14);
        let spread = ParticleCloud::new(1, vec![0.0, std::f64::consts::PI], vec![0.5, 0.5]).unwrap();
        let f = k.features(&spread.atoms());
        assert!((k.running_cost(&[0.0], &f, &[1.0]) - 2.5).abs() < 1e-14);
        assert!(k.running_cost_floor().unwrap() <= 0.0);
    }

    #[test]
    fn eikonal_cost_reads_lifted_mean() {
        let fam = EikonalFamily::new(PeriodicLookup::from_fn(1024, |y: f64| 1.0 + y.cos()).unwrap(), 1.0);
        let mu = ParticleCloud::new(1, vec![-0.3, 0.5], vec![0.5, 0.5]).unwrap();
        let f = fam.features(&mu.atoms());
        assert!((f[0] - 0.1).abs() < 1e-12);
        assert!((fam.running_cost(&[0.0], &f, &[2.0]) - (2.0 + 1.0 + 0.1f64.cos())).abs() < 1e-4);
    }
}
