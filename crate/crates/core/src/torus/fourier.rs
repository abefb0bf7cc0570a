use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{basis_modulus, count, two_pi, Real};

use super::measure::{Atoms, TorusMeasure};
use super::point::check_dim;

/// Coefficients `c_k` for every `k ∈ Z^d` with `|k|_∞ ≤ K`.
///
/// The same layout serves two purposes: `F_k(μ) = μ(e_k^*)` of a measure,
/// and the expansion `f = Σ c_k e_k` of a real function, where
/// `e_k(x) = (2π)^{-d/2} e^{ik·x}`. Storage is row-major over
/// `[-K, K]^d` with the first axis slowest, so negating `k` maps flat
/// index `i` to `len - 1 - i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable<S> {
    dim: usize,
    cutoff: usize,
    coeffs: Vec<Complex<S>>,
}

impl<S: Real> FourierTable<S> {
    pub fn zeros(dim: usize, cutoff: usize) -> Result<Self> {
        check_dim(dim)?;
        let len = (2 * cutoff + 1).pow(dim as u32);
        Ok(FourierTable { dim, cutoff, coeffs: vec![Complex::new(S::zero(), S::zero()); len] })
    }

    pub fn from_coeffs(dim: usize, cutoff: usize, coeffs: Vec<Complex<S>>) -> Result<Self> {
        let mut t = Self::zeros(dim, cutoff)?;
        if coeffs.len() != t.coeffs.len() {
            return Err(Error::DimensionMismatch { expected: t.coeffs.len(), found: coeffs.len() });
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("Fourier coefficient".into()));
        }
        t.coeffs = coeffs;
        Ok(t)
    }

    /// Table with the listed `(k, c_k)` entries and their conjugate mirrors.
    pub fn from_entries(dim: usize, cutoff: usize, entries: &[(Vec<i64>, Complex<S>)]) -> Result<Self> {
        let mut t = Self::zeros(dim, cutoff)?;
        for (k, c) in entries {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite(format!("coefficient for k = {k:?}")));
            }
            let i = t.index_of(k).ok_or_else(|| Error::InvalidArgument(format!("wavevector {k:?} outside cutoff {cutoff}")))?;
            let m = t.mirror(i);
            if i == m {
                t.coeffs[i] = Complex::new(c.re, S::zero());
            } else {
                t.coeffs[i] = *c;
                t.coeffs[m] = c.conj();
            }
        }
        Ok(t)
    }

    /// `amp·cos(k·x)` as a table.
    pub fn cosine(dim: usize, k: &[i64], amp: S) -> Result<Self> {
        let cutoff = k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0).max(1);
        // cos(k·x) = (2π)^{d/2}(e_k + e_{-k})/2
        let c = amp / basis_modulus::<S>(dim) / (S::one() + S::one());
        if k.iter().all(|&v| v == 0) {
            return Self::from_entries(dim, cutoff, &[(k.to_vec(), Complex::new(c + c, S::zero()))]);
        }
        Self::from_entries(dim, cutoff, &[(k.to_vec(), Complex::new(c, S::zero()))])
    }

    /// `amp·sin(k·x)` as a table.
    pub fn sine(dim: usize, k: &[i64], amp: S) -> Result<Self> {
        let cutoff = k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0).max(1);
        // sin(k·x) = (2π)^{d/2}(e_k - e_{-k})/(2i)
        let c = amp / basis_modulus::<S>(dim) / (S::one() + S::one());
        Self::from_entries(dim, cutoff, &[(k.to_vec(), Complex::new(S::zero(), -c))])
    }

    /// The constant function `value`.
    pub fn constant(dim: usize, value: S) -> Result<Self> {
        Self::cosine(dim, &vec![0; dim], value)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex<S>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<S>] {
        &mut self.coeffs
    }

    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.coeffs.len() - 1 - i
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let side = 2 * self.cutoff as i64 + 1;
        let mut i = 0i64;
        for &v in k {
            if v.unsigned_abs() as usize > self.cutoff {
                return None;
            }
            i = i * side + v + self.cutoff as i64;
        }
        Some(i as usize)
    }

    /// Wavevector stored at flat index `i`.
    pub fn wavevector(&self, mut i: usize) -> Vec<i64> {
        let side = 2 * self.cutoff + 1;
        let mut k = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            k[a] = (i % side) as i64 - self.cutoff as i64;
            i /= side;
        }
        k
    }

    /// `|k|²` for every stored index.
    pub fn wavenumbers_sq(&self) -> Vec<S> {
        (0..self.len()).map(|i| count::<S>(self.wavevector(i).iter().map(|v| (v * v) as usize).sum())).collect()
    }

    pub fn get(&self, k: &[i64]) -> Option<Complex<S>> {
        self.index_of(k).map(|i| self.coeffs[i])
    }

    /// The same coefficients stored at a larger or smaller cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let mut out = Self::zeros(self.dim, cutoff).expect("dimension already validated");
        for i in 0..self.len() {
            if let Some(j) = out.index_of(&self.wavevector(i)) {
                out.coeffs[j] = self.coeffs[i];
            }
        }
        out
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(())
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(FourierTable { dim: self.dim, cutoff: self.cutoff, coeffs })
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: S, other: &Self, b: S) -> Result<Self> {
        self.check_same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x * a + y * b).collect();
        Ok(FourierTable { dim: self.dim, cutoff: self.cutoff, coeffs })
    }

    pub fn scaled(&self, s: S) -> Self {
        FourierTable { dim: self.dim, cutoff: self.cutoff, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Table of `∂^β f` for the multi-index `beta`.
    pub fn derivative(&self, beta: &[u32]) -> Result<Self> {
        if beta.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: beta.len() });
        }
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.wavevector(i);
            let mut factor = Complex::new(S::one(), S::zero());
            for (a, &p) in beta.iter().enumerate() {
                let ik = Complex::new(S::zero(), S::from_i64(k[a]).expect("small integer"));
                for _ in 0..p {
                    factor = factor * ik;
                }
            }
            *c = *c * factor;
        }
        Ok(out)
    }

    /// Phases `e^{i m x_a}` for `m ∈ [-K, K]`, one row per axis.
    fn phases(&self, x: &[S]) -> Vec<Complex<S>> {
        let side = 2 * self.cutoff + 1;
        let mut out = vec![Complex::new(S::one(), S::zero()); self.dim * side];
        for (a, &xa) in x.iter().enumerate() {
            let row = &mut out[a * side..(a + 1) * side];
            for m in 1..=self.cutoff {
                let (s, c) = (count::<S>(m) * xa).sin_cos();
                row[self.cutoff + m] = Complex::new(c, s);
                row[self.cutoff - m] = Complex::new(c, -s);
            }
        }
        out
    }

    /// Visits `(flat index, e^{ik·x}, k)` for every stored `k`.
    fn for_each_phase<F: FnMut(usize, Complex<S>, &[i64])>(&self, x: &[S], mut f: F) {
        let side = 2 * self.cutoff + 1;
        let ph = self.phases(x);
        let mut k = vec![-(self.cutoff as i64); self.dim];
        let mut digits = vec![0usize; self.dim];
        for i in 0..self.len() {
            let mut p = ph[digits[0]];
            for a in 1..self.dim {
                p = p * ph[a * side + digits[a]];
            }
            f(i, p, &k);
            for a in (0..self.dim).rev() {
                digits[a] += 1;
                k[a] += 1;
                if digits[a] < side {
                    break;
                }
                digits[a] = 0;
                k[a] = -(self.cutoff as i64);
            }
        }
    }

    /// `f(x) = Re Σ c_k e_k(x)`.
    pub fn evaluate(&self, x: &[S]) -> S {
        debug_assert_eq!(x.len(), self.dim);
        if self.dim == 1 {
            return self.evaluate_1d(x[0]);
        }
        let mut acc = S::zero();
        self.for_each_phase(x, |i, p, _| acc += (self.coeffs[i] * p).re);
        acc * basis_modulus::<S>(self.dim)
    }

    fn evaluate_1d(&self, x: S) -> S {
        let k = self.cutoff;
        let mut acc = self.coeffs[k].re;
        for m in 1..=k {
            let (s, c) = (count::<S>(m) * x).sin_cos();
            let p = Complex::new(c, s);
            acc += (self.coeffs[k + m] * p).re + (self.coeffs[k - m] * p.conj()).re;
        }
        acc * basis_modulus::<S>(1)
    }

    /// Value, gradient and Hessian (row-major `d×d`) at `x`.
    pub fn jet(&self, x: &[S]) -> Jet<S> {
        let d = self.dim;
        let mut jet = Jet { value: S::zero(), grad: vec![S::zero(); d], hess: vec![S::zero(); d * d] };
        self.for_each_phase(x, |i, p, k| {
            let cp = self.coeffs[i] * p;
            jet.value += cp.re;
            for a in 0..d {
                let ka = S::from_i64(k[a]).expect("small integer");
                // Re(i·k_a·cp) = -k_a·Im(cp)
                jet.grad[a] -= ka * cp.im;
                for b in 0..d {
                    let kb = S::from_i64(k[b]).expect("small integer");
                    jet.hess[a * d + b] -= ka * kb * cp.re;
                }
            }
        });
        let m = basis_modulus::<S>(d);
        jet.value *= m;
        jet.grad.iter_mut().for_each(|g| *g *= m);
        jet.hess.iter_mut().for_each(|h| *h *= m);
        jet
    }

    /// `η(f) = Σ c_k conj(F_k(η))` for a function table `self` and the
    /// Fourier table of a (signed) measure `eta`, over the common range of k.
    pub fn pair_with_measure(&self, eta: &Self) -> Result<S> {
        if self.dim != eta.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: eta.dim });
        }
        let (small, large) = if self.cutoff <= eta.cutoff { (self, eta) } else { (eta, self) };
        let mut acc = S::zero();
        for i in 0..small.len() {
            let j = large.index_of(&small.wavevector(i)).expect("within larger cutoff");
            let (c, f) = if small.cutoff == self.cutoff { (self.coeffs[i], eta.coeffs[j]) } else { (self.coeffs[j], eta.coeffs[i]) };
            acc += (c * f.conj()).re;
        }
        Ok(acc)
    }

    /// `Σ (1+|k|²)^{s/2} |c_k|·(2π)^{-d/2}`, an upper bound on the sup norm
    /// of every derivative of order ≤ s.
    pub fn weighted_l1(&self, s: S) -> S {
        let half = s / (S::one() + S::one());
        let acc: S = self.wavenumbers_sq().iter().zip(&self.coeffs).map(|(&k2, c)| (S::one() + k2).powf(half) * c.norm()).sum();
        acc * basis_modulus::<S>(self.dim)
    }

    /// Largest violation of `c_{-k} = conj(c_k)`.
    pub fn symmetry_defect(&self) -> S {
        (0..self.len()).map(|i| (self.coeffs[i] - self.coeffs[self.mirror(i)].conj()).norm()).fold(S::zero(), S::max)
    }

    /// Coefficients of `f` from its values at the nodes `2πj/n` of an
    /// `n^d` grid (row-major), keeping `|k|_∞ ≤ K` with `2K < n`.
    pub fn from_grid_values(dim: usize, n: usize, cutoff: usize, values: &[S]) -> Result<Self> {
        check_dim(dim)?;
        if 2 * cutoff >= n {
            return Err(Error::InvalidArgument(format!("cutoff {cutoff} aliases on a grid of {n} nodes")));
        }
        if values.len() != n.pow(dim as u32) {
            return Err(Error::DimensionMismatch { expected: n.pow(dim as u32), found: values.len() });
        }
        let h = two_pi::<S>() / count(n);
        let vol = h.powi(dim as i32);
        let mut coords = vec![S::zero(); values.len() * dim];
        for (j, x) in coords.chunks_exact_mut(dim).enumerate() {
            let mut r = j;
            for a in (0..dim).rev() {
                x[a] = count::<S>(r % n) * h;
                r /= n;
            }
        }
        // Reuse the measure transform with signed "weights" f(x_j)·h^d.
        let weights: Vec<S> = values.iter().map(|&v| v * vol).collect();
        let atoms = Atoms::weighted(dim, &coords, &weights);
        table_of_atoms(&atoms, cutoff)
    }
}

/// Value, gradient and row-major Hessian of a function at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    pub value: S,
    pub grad: Vec<S>,
    pub hess: Vec<S>,
}

/// `F_k(μ) = μ(e_k^*)` for a single wavevector.
pub fn fourier_coefficient<S: Real>(mu: &TorusMeasure<S>, k: &[i64]) -> Result<Complex<S>> {
    if k.len() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: k.len() });
    }
    let atoms = mu.atoms();
    let mut acc = Complex::new(S::zero(), S::zero());
    for (x, w) in atoms.iter() {
        let phase: S = x.iter().zip(k).map(|(&xa, &ka)| S::from_i64(ka).expect("small integer") * xa).sum();
        let (s, c) = phase.sin_cos();
        acc = acc + Complex::new(c, -s) * w;
    }
    Ok(acc * basis_modulus::<S>(mu.dim()))
}

/// All `F_k(μ)` with `|k|_∞ ≤ K`. The upper half of the table is filled by
/// conjugation, so `F_{-k} = conj(F_k)` holds exactly.
pub fn fourier_table<S: Real>(mu: &TorusMeasure<S>, cutoff: usize) -> Result<FourierTable<S>> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("Fourier cutoff must be at least 1".into()));
    }
    table_of_atoms(&mu.atoms(), cutoff)
}

/// Fourier table of weighted atoms (weights may be signed).
pub fn table_of_atoms<S: Real>(atoms: &Atoms<'_, S>, cutoff: usize) -> Result<FourierTable<S>> {
    let dim = atoms.dim();
    let mut table = FourierTable::zeros(dim, cutoff)?;
    let len = table.len();
    let half = len / 2; // indices 0..=half cover k ≤ 0 lexicographically
    let side = 2 * cutoff + 1;
    let mut ph = vec![Complex::new(S::zero(), S::zero()); dim * side];
    let mut digits = vec![0usize; dim];
    let mut acc = vec![Complex::new(S::zero(), S::zero()); half + 1];
    for (x, w) in atoms.iter() {
        for (a, &xa) in x.iter().enumerate() {
            let row = &mut ph[a * side..(a + 1) * side];
            row[cutoff] = Complex::new(w, S::zero());
            for m in 1..=cutoff {
                let (s, c) = (count::<S>(m) * xa).sin_cos();
                // e^{-imx}; the weight rides on axis 0 only.
                let (c, s) = if a == 0 { (c * w, s * w) } else { (c, s) };
                row[cutoff + m] = Complex::new(c, -s);
                row[cutoff - m] = Complex::new(c, s);
            }
            if a > 0 {
                row[cutoff] = Complex::new(S::one(), S::zero());
            }
        }
        if dim == 1 {
            for (i, slot) in acc.iter_mut().enumerate() {
                *slot = *slot + ph[i];
            }
            continue;
        }
        digits.iter_mut().for_each(|d| *d = 0);
        for slot in acc.iter_mut() {
            let mut p = ph[digits[0]];
            for a in 1..dim {
                p = p * ph[a * side + digits[a]];
            }
            *slot = *slot + p;
            for a in (0..dim).rev() {
                digits[a] += 1;
                if digits[a] < side {
                    break;
                }
                digits[a] = 0;
            }
        }
    }
    let m = basis_modulus::<S>(dim);
    let coeffs = table.coeffs_mut();
    for (i, c) in acc.into_iter().enumerate() {
        coeffs[i] = c * m;
    }
    coeffs[half].im = S::zero();
    for i in 0..half {
        coeffs[len - 1 - i] = coeffs[i].conj();
    }
    Ok(table)
}
