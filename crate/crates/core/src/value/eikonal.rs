use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, two_pi, Real};
use crate::torus::{lift_mean, wrap_centered, Atoms};

use super::lookup::PeriodicLookup;

/// Largest number of substeps one macro step of the Lax–Friedrichs sweep may
/// be split into before the solve gives up.
pub const MAX_SUBSTEPS: usize = 1 << 12;

/// Deterministic control problem on the circle: `dY = a du`, running cost
/// `½a² + L(Y)`, zero terminal cost, discretized on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EikonalProblem<S> {
    pub potential: PeriodicLookup<S>,
    pub time_steps: usize,
    pub space_nodes: usize,
    pub start: S,
    pub end: S,
}

impl<S: Real> EikonalProblem<S> {
    /// Horizon `[0, 1]`.
    pub fn new(potential: PeriodicLookup<S>, time_steps: usize, space_nodes: usize) -> Result<Self> {
        let p = EikonalProblem { potential, time_steps, space_nodes, start: S::zero(), end: S::one() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_horizon(mut self, start: S, end: S) -> Result<Self> {
        self.start = start;
        self.end = end;
        self.validate()?;
        Ok(self)
    }

    pub fn with_grid(&self, time_steps: usize, space_nodes: usize) -> Result<Self> {
        let p = EikonalProblem { time_steps, space_nodes, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_steps == 0 || self.space_nodes < 4 {
            return Err(Error::InvalidArgument("eikonal grid needs at least 1 time step and 4 space nodes".into()));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.start < self.end) {
            return Err(Error::InvalidArgument("eikonal horizon must satisfy start < end".into()));
        }
        Ok(())
    }

    fn dt(&self) -> S {
        (self.end - self.start) / count(self.time_steps)
    }

    fn dy(&self) -> S {
        two_pi::<S>() / count(self.space_nodes)
    }

    fn ys(&self) -> Vec<S> {
        (0..self.space_nodes).map(|j| -S::PI() + count::<S>(j) * self.dy()).collect()
    }

    fn times(&self) -> Vec<S> {
        (0..=self.time_steps).map(|i| self.start + count::<S>(i) * self.dt()).collect()
    }

    /// Upper bound on `|∂_y w|`, hence on the optimal control.
    fn gradient_bound(&self) -> S {
        self.potential.lipschitz() * (self.end - self.start)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    LaxFriedrichs,
    SemiLagrangian,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::LaxFriedrichs => "lax-friedrichs",
            Scheme::SemiLagrangian => "semi-lagrangian",
        })
    }
}

/// Grid values `w(t_i, y_j)` with `t_i = start + iΔt` and `y_j = -π + jΔy`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable<S> {
    times: Vec<S>,
    ys: Vec<S>,
    /// Time-major, `(time_steps + 1) × space_nodes`.
    values: Vec<S>,
    scheme: Scheme,
    cfl: S,
    error_estimate: Option<S>,
}

impl<S: Real> ValueTable<S> {
    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn ys(&self) -> &[S] {
        &self.ys
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[S] {
        let n = self.ys.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Largest `Δt·θ/Δy` used by the sweep (Lax–Friedrichs) or `AΔt/Δy`
    /// (semi-Lagrangian).
    pub fn cfl(&self) -> S {
        self.cfl
    }

    /// Sup-distance to the same problem solved on the half-resolution grid,
    /// or between the last two oracle ladder levels.
    pub fn error_estimate(&self) -> Option<S> {
        self.error_estimate
    }

    /// Bilinear interpolation, periodic in `y`; `t` is clamped to the grid.
    pub fn eval(&self, t: S, y: S) -> S {
        let nt = self.times.len() - 1;
        let ny = self.ys.len();
        let t0 = self.times[0];
        let dt = (self.times[nt] - t0) / count(nt);
        let s = ((t - t0) / dt).max(S::zero()).min(count(nt));
        let i = s.floor().to_usize().unwrap_or(0).min(nt.saturating_sub(1));
        let ft = s - count(i);
        let dy = two_pi::<S>() / count(ny);
        let u = (wrap_centered(y) + S::PI()) / dy;
        let j = u.floor().to_usize().unwrap_or(0).min(ny - 1);
        let fy = u - count(j);
        let jn = (j + 1) % ny;
        let at = |i: usize| {
            let r = self.row(i);
            r[j] + fy * (r[jn] - r[j])
        };
        if nt == 0 {
            return at(0);
        }
        at(i) + ft * (at(i + 1) - at(i))
    }

    /// `max |self − other|` over the nodes of `self`, `other` interpolated.
    pub fn sup_distance(&self, other: &ValueTable<S>) -> S {
        let mut worst = S::zero();
        for (i, &t) in self.times.iter().enumerate() {
            for (j, &y) in self.ys.iter().enumerate() {
                worst = worst.max((self.row(i)[j] - other.eval(t, y)).abs());
            }
        }
        worst
    }

    /// `w(t_{i+1}, y) ≤ w(t_i, y) + tol` everywhere.
    pub fn is_nonincreasing_in_time(&self, tol: S) -> bool {
        (1..self.times.len()).all(|i| self.row(i).iter().zip(self.row(i - 1)).all(|(&later, &earlier)| later <= earlier + tol))
    }

    /// `t y w` lines, one block per time level separated by blank lines.
    pub fn write_surface<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (i, t) in self.times.iter().enumerate() {
            if i > 0 {
                writeln!(out)?;
            }
            for (y, w) in self.ys.iter().zip(self.row(i)) {
                writeln!(out, "{t} {y} {w}")?;
            }
        }
        Ok(())
    }
}

/// One backward Lax–Friedrichs sweep; returns values (time-major, forward
/// order) and the largest CFL number used.
fn lax_friedrichs<S: Real>(p: &EikonalProblem<S>) -> Result<(Vec<S>, S)> {
    let (nt, ny) = (p.time_steps, p.space_nodes);
    let dy = p.dy();
    let source: Vec<S> = p.ys().iter().map(|&y| p.potential.eval(y)).collect();
    let half = lit::<S>(0.5);
    let mut rows = vec![S::zero(); (nt + 1) * ny];
    let mut w = vec![S::zero(); ny];
    let mut next = vec![S::zero(); ny];
    let mut cfl = S::zero();
    let mut substeps = 1usize;
    for n in (0..nt).rev() {
        // Retry the macro step with more substeps until every substep is
        // within the CFL bound of the gradient it actually sees.
        'attempt: loop {
            let h = p.dt() / count(substeps);
            let mut trial = w.clone();
            let mut level_cfl = S::zero();
            for _ in 0..substeps {
                let theta = (0..ny)
                    .map(|j| ((trial[(j + 1) % ny] - trial[j]) / dy).abs())
                    .fold(S::zero(), S::max);
                let ratio = theta * h / dy;
                if ratio > S::one() {
                    substeps *= 2;
                    if substeps > MAX_SUBSTEPS {
                        return Err(Error::Cfl { level: n, substeps });
                    }
                    continue 'attempt;
                }
                level_cfl = level_cfl.max(ratio);
                for j in 0..ny {
                    let (left, right) = (trial[(j + ny - 1) % ny], trial[(j + 1) % ny]);
                    let plus = (right - trial[j]) / dy;
                    let minus = (trial[j] - left) / dy;
                    let mid = half * (plus + minus);
                    let flux = half * mid * mid - half * theta * (plus - minus);
                    next[j] = trial[j] - h * (flux - source[j]);
                }
                std::mem::swap(&mut trial, &mut next);
            }
            w = trial;
            cfl = cfl.max(level_cfl);
            break;
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: n });
        }
        rows[n * ny..(n + 1) * ny].copy_from_slice(&w);
    }
    Ok((rows, cfl))
}

/// Monotone Lax–Friedrichs sweep for `-∂_t w = -½(∂_y w)² + L(y)`, backward
/// from `w(end, ·) = 0`, with substeps added whenever `Δt·max|∂_y w| > Δy`.
pub fn eikonal_solve<S: Real>(p: &EikonalProblem<S>) -> Result<ValueTable<S>> {
    p.validate()?;
    let (values, cfl) = lax_friedrichs(p)?;
    let mut table = ValueTable { times: p.times(), ys: p.ys(), values, scheme: Scheme::LaxFriedrichs, cfl, error_estimate: None };
    if p.time_steps % 2 == 0 && p.space_nodes % 2 == 0 && p.space_nodes >= 8 {
        let coarse_p = p.with_grid(p.time_steps / 2, p.space_nodes / 2)?;
        let (coarse, _) = lax_friedrichs(&coarse_p)?;
        let ny = p.space_nodes;
        let mut gap = S::zero();
        for i in 0..=coarse_p.time_steps {
            for j in 0..coarse_p.space_nodes {
                gap = gap.max((table.values[2 * i * ny + 2 * j] - coarse[i * coarse_p.space_nodes + j]).abs());
            }
        }
        table.error_estimate = Some(gap);
    }
    Ok(table)
}

/// Dynamic programming over deterministic paths: each step minimizes
/// `½a²Δt + L(y)Δt + w(t+Δt, y + aΔt)` over `|a| ≤ A`, exactly for the
/// piecewise-linear interpolant of `w(t+Δt, ·)`.
pub fn semi_lagrangian<S: Real>(p: &EikonalProblem<S>, max_control: S) -> Result<ValueTable<S>> {
    p.validate()?;
    let (nt, ny) = (p.time_steps, p.space_nodes);
    let (dt, dy) = (p.dt(), p.dy());
    let ys = p.ys();
    let source: Vec<S> = ys.iter().map(|&y| p.potential.eval(y)).collect();
    let reach = (max_control * dt / dy).ceil().to_i64().unwrap_or(0) + 1;
    let half = lit::<S>(0.5);
    let mut rows = vec![S::zero(); (nt + 1) * ny];
    let mut next = vec![S::zero(); ny];
    let wrap_index = |j: i64| j.rem_euclid(ny as i64) as usize;
    for n in (0..nt).rev() {
        let later = rows[(n + 1) * ny..(n + 2) * ny].to_vec();
        for (j, out) in next.iter_mut().enumerate() {
            let mut best = S::infinity();
            for cell in -reach..reach {
                let w0 = later[wrap_index(j as i64 + cell)];
                let w1 = later[wrap_index(j as i64 + cell + 1)];
                let slope = (w1 - w0) / dy;
                let lo = S::from_i64(cell).expect("cell offset fits") * dy / dt;
                let hi = lo + dy / dt;
                if lo > max_control || hi < -max_control {
                    continue;
                }
                let a = (-slope).max(lo.max(-max_control)).min(hi.min(max_control));
                let offset = a * dt - lo * dt;
                let v = half * a * a * dt + w0 + slope * offset;
                best = best.min(v);
            }
            *out = best + dt * source[j];
        }
        rows[n * ny..(n + 1) * ny].copy_from_slice(&next);
    }
    Ok(ValueTable {
        times: p.times(),
        ys,
        values: rows,
        scheme: Scheme::SemiLagrangian,
        cfl: max_control * dt / dy,
        error_estimate: None,
    })
}

/// Refinement ladder for [`semi_lagrangian`]: level `ℓ` uses
/// `base_steps·2^ℓ × base_nodes·2^ℓ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleLadder<S> {
    pub base_steps: usize,
    pub base_nodes: usize,
    pub max_levels: usize,
    /// Stop once successive levels agree to this sup-distance on the
    /// coarser grid.
    pub tolerance: S,
}

impl<S: Real> Default for OracleLadder<S> {
    fn default() -> Self {
        OracleLadder { base_steps: 100, base_nodes: 256, max_levels: 5, tolerance: lit(1e-3) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<S> {
    /// The finest level computed.
    pub table: ValueTable<S>,
    pub levels: usize,
    /// Sup-distance between the last two levels.
    pub last_change: S,
    pub converged: bool,
}

/// Runs the ladder on `p.potential` and `p`'s horizon (the grid of `p` is
/// not used).
pub fn oracle_ladder<S: Real>(p: &EikonalProblem<S>, ladder: &OracleLadder<S>) -> Result<OracleResult<S>> {
    if ladder.max_levels < 2 {
        return Err(Error::InvalidArgument("oracle ladder needs at least two levels".into()));
    }
    let control_bound = S::one() + lit::<S>(2.0) * p.gradient_bound();
    let mut previous = semi_lagrangian(&p.with_grid(ladder.base_steps, ladder.base_nodes)?, control_bound)?;
    let mut last_change = S::infinity();
    for level in 1..ladder.max_levels {
        let scale = 1usize << level;
        let mut table = semi_lagrangian(&p.with_grid(ladder.base_steps * scale, ladder.base_nodes * scale)?, control_bound)?;
        let (cn, fny) = (previous.ys.len(), table.ys.len());
        last_change = S::zero();
        for i in 0..previous.times.len() {
            for j in 0..cn {
                last_change = last_change.max((previous.row(i)[j] - table.values[2 * i * fny + 2 * j]).abs());
            }
        }
        table.error_estimate = Some(last_change);
        if last_change <= ladder.tolerance {
            return Ok(OracleResult { table, levels: level + 1, last_change, converged: true });
        }
        previous = table;
    }
    Ok(OracleResult { table: previous, levels: ladder.max_levels, last_change, converged: false })
}

/// `w(t, y)` by direct minimization over deterministic paths, refined with
/// the default ladder.
pub fn eikonal_trajectory_oracle<S: Real>(p: &EikonalProblem<S>, t: S, y: S) -> Result<S> {
    let result = oracle_ladder(p, &OracleLadder::default())?;
    Ok(result.table.eval(t, y))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedValue<S> {
    pub value: S,
    /// The lifted mean `m(μ)`.
    pub mean: S,
    /// The lift is not well defined (too much mass near the cut).
    pub ambiguous: bool,
}

/// `w(t, m(μ))` for a one-dimensional measure.
pub fn reduced_value<S: Real>(t: S, mu: &Atoms<'_, S>, table: &ValueTable<S>) -> Result<ReducedValue<S>> {
    if mu.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: mu.dim() });
    }
    let lift = lift_mean(mu)?;
    Ok(ReducedValue { value: table.eval(t, lift.mean), mean: lift.mean, ambiguous: lift.ambiguous })
}

/// Residual of the classical equation at interior nodes where both the
/// time and space central differences agree with a half-resolution table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalResidual<S> {
    pub max_residual: S,
    pub nodes_checked: usize,
    pub nodes_skipped: usize,
}

/// Compares central differences of `fine` (grid `2nt × 2ny`) with those of
/// `coarse` (`nt × ny`) at the coarse interior nodes; where they agree to
/// `stability`, records `|−∂_t w + ½(∂_y w)² − L(y)|` from `fine`.
pub fn classical_residual<S: Real>(
    fine: &ValueTable<S>,
    coarse: &ValueTable<S>,
    potential: &PeriodicLookup<S>,
    stability: S,
) -> Result<ClassicalResidual<S>> {
    let (cnt, cny) = (coarse.times.len() - 1, coarse.ys.len());
    if fine.times.len() - 1 != 2 * cnt || fine.ys.len() != 2 * cny {
        return Err(Error::InvalidArgument("fine table must double both grid sizes of the coarse table".into()));
    }
    let derivatives = |table: &ValueTable<S>, i: usize, j: usize| {
        let ny = table.ys.len();
        let nt = table.times.len() - 1;
        let dt = (table.times[nt] - table.times[0]) / count(nt);
        let dy = two_pi::<S>() / count(ny);
        let two = lit::<S>(2.0);
        let wt = (table.row(i + 1)[j] - table.row(i - 1)[j]) / (two * dt);
        let wy = (table.row(i)[(j + 1) % ny] - table.row(i)[(j + ny - 1) % ny]) / (two * dy);
        (wt, wy)
    };
    let mut out = ClassicalResidual { max_residual: S::zero(), nodes_checked: 0, nodes_skipped: 0 };
    for i in 1..cnt {
        for j in 0..cny {
            let (ct, cy) = derivatives(coarse, i, j);
            let (ft, fy) = derivatives(fine, 2 * i, 2 * j);
            if (ct - ft).abs() > stability || (cy - fy).abs() > stability {
                out.nodes_skipped += 1;
                continue;
            }
            let r = -ft + lit::<S>(0.5) * fy * fy - potential.eval(coarse.ys[j]);
            out.max_residual = out.max_residual.max(r.abs());
            out.nodes_checked += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ParticleCloud;

    fn cosine_problem(n: usize) -> EikonalProblem<f64> {
        EikonalProblem::new(PeriodicLookup::from_fn(4096, |y: f64| 1.0 + y.cos()).unwrap(), n, n).unwrap()
    }

    #[test]
    fn zero_and_constant_potentials() {
        let zero = eikonal_solve(&EikonalProblem::new(PeriodicLookup::constant(0.0), 20, 16).unwrap()).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let c = EikonalProblem::new(PeriodicLookup::constant(0.7), 20, 16).unwrap();
        for table in [eikonal_solve(&c).unwrap(), semi_lagrangian(&c, 1.0).unwrap()] {
            for (i, &t) in table.times().iter().enumerate() {
                assert!(table.row(i).iter().all(|&v: &f64| (v - 0.7 * (1.0 - t)).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn schemes_agree_and_decrease_in_time() {
        let p = cosine_problem(100);
        let lf = eikonal_solve(&p).unwrap();
        let sl = semi_lagrangian(&p.with_grid(200, 512).unwrap(), 3.0).unwrap();
        assert!(lf.sup_distance(&sl) < 3e-2);
        assert!(lf.is_nonincreasing_in_time(1e-12));
        assert!(lf.cfl() <= 1.0);
        assert!(lf.error_estimate().unwrap() > 0.0);
        assert!(lf.row(100).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reduced_value_of_two_atoms_reads_the_mean() {
        let table = eikonal_solve(&cosine_problem(40)).unwrap();
        let mu = ParticleCloud::new(1, vec![-0.3, 0.5], vec![0.5, 0.5]).unwrap();
        let r = reduced_value(0.25, &mu.atoms(), &table).unwrap();
        assert!((r.mean - 0.1).abs() < 1e-12 && !r.ambiguous);
        assert_eq!(r.value, table.eval(0.25, 0.1));
        assert_eq!(reduced_value(1.0, &mu.atoms(), &table).unwrap().value, 0.0);
    }

    #[test]
    fn surface_has_one_line_per_node() {
        let table = eikonal_solve(&EikonalProblem::new(PeriodicLookup::constant(1.0), 2, 4).unwrap()).unwrap();
        let mut buf = Vec::new();
        table.write_surface(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| !l.is_empty()).count(), 12);
        assert!(text.starts_with("0 -3.141592653589793 1\n"));
    }
}
