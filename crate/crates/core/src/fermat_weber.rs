//! Fermat–Weber sets of the asymmetric tropical distance and the tropical
//! median consensus point.
//!
//! The Fermat–Weber set `FW(S) = argmin_t Σ_s d(s, t)` is a polytrope, i.e.
//! the solution set of difference constraints `t_j − t_i ≤ c[i][j]`. We
//! obtain `c` from a single optimal solution `y` of the transportation dual
//!
//! ```text
//! maximize Σ y[s][i]·s_i   s.t.  Σ_i y[s][i] = n,  Σ_s y[s][i] = m,  y ≥ 0
//! ```
//!
//! A primal point is optimal iff it is complementary to `y`, which for a
//! positive `y[s][i]` means coordinate `i` attains `max_j (s_j − t_j)`. Each
//! such pair contributes `t_i − t_j ≤ s_i − s_j`; shortest-path closure of
//! these bounds is the tight matrix. [`fw_polytrope_by_suprema`] computes the
//! same matrix by maximizing every `t_j − t_i` over the optimal face.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, Relation};
use crate::phylo::ultrametric::{sqrt_machine_epsilon, PairIndexMap, PairVector};
use crate::scalar::{convert, sum, Arithmetic, Scalar};
use crate::trop::{asym_dist_unchecked, canonicalize, torus_eq, trop_hull_member, TorusPoint};

/// Tolerance for zero tests on polytrope entries in float mode.
const FLOAT_TOL: f64 = 1e-9;

/// A nonempty list of sites of common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet<S> {
    sites: Vec<TorusPoint<S>>,
}

impl<S: Scalar> SiteSet<S> {
    pub fn new(sites: Vec<TorusPoint<S>>) -> Result<Self> {
        let first = sites.first().ok_or(Error::EmptyInput("no sites"))?;
        let n = first.len();
        if let Some(bad) = sites.iter().find(|s| s.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Ok(SiteSet { sites })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        SiteSet::new(rows.iter().map(|r| TorusPoint::from_ints(r)).collect())
    }

    pub fn sites(&self) -> &[TorusPoint<S>] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sites[0].len()
    }

    /// Sites at the given indices.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        SiteSet::new(indices.iter().map(|&i| self.sites[i].clone()).collect())
    }

    /// `Σ_s d(s, t)`.
    pub fn total_distance(&self, t: &TorusPoint<S>) -> Result<S> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: t.len(),
            });
        }
        Ok(sum(self
            .sites
            .iter()
            .map(|s| asym_dist_unchecked(s.coords(), t.coords()))))
    }
}

/// Floyd–Warshall closure with a zero (or negative) diagonal.
fn close<S: Scalar>(mut c: Vec<Vec<Option<S>>>) -> Vec<Vec<Option<S>>> {
    let n = c.len();
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = Some(match row[i].take() {
            Some(v) if v.is_negative() => v,
            _ => S::zero(),
        });
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = c[i][k].clone() else { continue };
            for j in 0..n {
                let Some(kj) = c[k][j].clone() else { continue };
                let via = ik.clone() + kj;
                if c[i][j].as_ref().is_none_or(|cur| via < *cur) {
                    c[i][j] = Some(via);
                }
            }
        }
    }
    c
}

/// Smallest mean weight of a directed cycle, by Karp's recurrence; edge
/// `i → j` has weight `c[i][j]`. Infinite when there is no cycle.
fn min_cycle_mean<S: Scalar>(c: &[Vec<Option<S>>]) -> f64 {
    let n = c.len();
    let w: Vec<Vec<Option<f64>>> = c
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| if i == j { None } else { v.as_ref().map(|v| v.to_f64_lossy()) })
                .collect()
        })
        .collect();
    let mut d = vec![vec![f64::INFINITY; n]; n + 1];
    d[0].fill(0.0);
    for k in 1..=n {
        for u in 0..n {
            if d[k - 1][u].is_infinite() {
                continue;
            }
            for v in 0..n {
                if let Some(x) = w[u][v] {
                    d[k][v] = d[k][v].min(d[k - 1][u] + x);
                }
            }
        }
    }
    (0..n)
        .filter(|&v| d[n][v].is_finite())
        .map(|v| {
            (0..n)
                .filter(|&k| d[k][v].is_finite())
                .map(|k| (d[n][v] - d[k][v]) / (n - k) as f64)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Difference-bound matrix: `c[i][j] = sup { t_j − t_i : t ∈ FW(S) }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytrope<S> {
    c: Vec<Vec<S>>,
}

impl<S: Scalar> Polytrope<S> {
    /// Closes raw bounds under `c[i][k] ≤ c[i][j] + c[j][k]`. `None` entries
    /// are unbounded. Fails if the system is empty or unbounded.
    ///
    /// In float mode, negative cycles whose mean weight stays above
    /// `−√ε₀·(1 + scale)` are read as rounding in the bounds: every finite
    /// bound is loosened by that mean and the system closed again.
    pub fn from_bounds(bounds: Vec<Vec<Option<S>>>) -> Result<Self> {
        let n = bounds.len();
        if let Some(row) = bounds.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        let closed = close(bounds.clone());
        if !(0..n).any(|i| closed[i][i].as_ref().is_some_and(|d| d.is_neg(FLOAT_TOL))) {
            return Self::finish(closed);
        }
        if S::MODE == Arithmetic::Exact {
            return Err(Error::InvalidArgument("empty polytrope".to_string()));
        }
        let scale = bounds
            .iter()
            .flatten()
            .flatten()
            .map(|v| v.to_f64_lossy().abs())
            .fold(0.0, f64::max);
        let depth = -min_cycle_mean(&bounds);
        if depth > sqrt_machine_epsilon() * (1.0 + scale) {
            return Err(Error::InvalidArgument("empty polytrope".to_string()));
        }
        let slack: S = convert(&(depth * (1.0 + 1e-6)));
        let loosened = bounds
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.map(|v| v + slack.clone())).collect())
            .collect();
        let closed = close(loosened);
        if (0..n).any(|i| closed[i][i].as_ref().is_some_and(|d| d.is_neg(FLOAT_TOL))) {
            return Err(Error::InvalidArgument("empty polytrope".to_string()));
        }
        Self::finish(closed)
    }

    fn finish(closed: Vec<Vec<Option<S>>>) -> Result<Self> {
        let mut out = Vec::with_capacity(closed.len());
        for (i, row) in closed.into_iter().enumerate() {
            let mut row: Vec<S> = row
                .into_iter()
                .map(|v| v.ok_or(Error::InvalidArgument("unbounded polytrope".to_string())))
                .collect::<Result<_>>()?;
            row[i] = S::zero();
            out.push(row);
        }
        Ok(Polytrope { c: out })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.c[i][j]
    }

    pub fn matrix(&self) -> &[Vec<S>] {
        &self.c
    }

    pub fn contains(&self, t: &TorusPoint<S>) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| !(t[j].clone() - t[i].clone() - self.c[i][j].clone()).is_pos(FLOAT_TOL))
        })
    }

    /// Dimension: connected components of `{i, j}` with `c[i][j] + c[j][i] = 0`, minus one.
    pub fn dimension(&self) -> usize {
        let n = self.dim();
        let mut comp: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in i + 1..n {
                let width = self.c[i][j].clone() + self.c[j][i].clone();
                if width.is_zero_tol(FLOAT_TOL) {
                    let (a, b) = (comp[i], comp[j]);
                    if a != b {
                        comp.iter_mut().filter(|x| **x == b).for_each(|x| *x = a);
                    }
                }
            }
        }
        let mut roots = comp;
        roots.sort_unstable();
        roots.dedup();
        roots.len() - 1
    }

    /// Tropical vertices: the candidates `g⁽ʲ⁾ᵢ = −c[i][j]` (the point of the
    /// polytrope where `t_j − t_i` is maximal for every `i`), deduplicated
    /// modulo 𝟙 and with every candidate that is a tropical combination of
    /// the remaining ones removed. Returned in canonical form.
    pub fn tropical_vertices(&self) -> Vec<TorusPoint<S>> {
        let n = self.dim();
        let mut cands: Vec<TorusPoint<S>> = Vec::with_capacity(n);
        for j in 0..n {
            let col: Vec<S> = (0..n).map(|i| -self.c[i][j].clone()).collect();
            let g = TorusPoint::new(col).expect("n >= 2");
            if !cands.iter().any(|h| torus_eq(h, &g)) {
                cands.push(g);
            }
        }
        let mut k = 0;
        while k < cands.len() && cands.len() > 1 {
            let others: Vec<TorusPoint<S>> = cands
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, p)| p.clone())
                .collect();
            let redundant = trop_hull_member(&cands[k], &others)
                .map(|m| m.member)
                .unwrap_or(false);
            if redundant {
                cands.remove(k);
            } else {
                k += 1;
            }
        }
        cands.iter().map(canonicalize).collect()
    }
}

/// Optimal value of `min_t Σ_s d(s, t)`, from the primal LP over `t`
/// (last coordinate fixed to 0) and one auxiliary `M_s ≥ s_i − t_i` per site.
pub fn fw_value<S: Scalar>(sites: &SiteSet<S>) -> Result<S> {
    let lp = primal_program(sites);
    Ok(solve_lp(&lp)?.optimal_value()? + primal_constant(sites))
}

/// Variables: `t_0 … t_{n−2}` then `M_0 … M_{m−1}`. The objective omits the
/// constant `−Σ s_i`, which [`primal_constant`] supplies.
fn primal_program<S: Scalar>(sites: &SiteSet<S>) -> LinearProgram<S> {
    let n = sites.dim();
    let m = sites.len();
    let free = n - 1;
    let mut lp = LinearProgram::new(free + m);
    for i in 0..free {
        lp.objective[i] = S::from_int(m as i64);
    }
    for s in 0..m {
        lp.objective[free + s] = S::from_int(n as i64);
    }
    for (s, site) in sites.sites().iter().enumerate() {
        for i in 0..n {
            let mut row = vec![S::zero(); free + m];
            row[free + s] = S::one();
            if i < free {
                row[i] = S::one();
            }
            lp.add_constraint(row, Relation::Ge, site[i].clone());
        }
    }
    lp
}

fn primal_constant<S: Scalar>(sites: &SiteSet<S>) -> S {
    -sum(sites.sites().iter().flat_map(|s| s.iter().cloned()))
}

/// Optimal transport plan of the dual and the resulting optimal value.
fn transport_solution<S: Scalar>(sites: &SiteSet<S>) -> Result<(Vec<S>, S)> {
    let n = sites.dim();
    let m = sites.len();
    let mut lp = LinearProgram::new(m * n);
    for (s, site) in sites.sites().iter().enumerate() {
        for i in 0..n {
            lp.objective[s * n + i] = -site[i].clone();
            lp.set_lower(s * n + i, S::zero());
        }
    }
    for s in 0..m {
        let mut row = vec![S::zero(); m * n];
        row[s * n..(s + 1) * n].iter_mut().for_each(|v| *v = S::one());
        lp.add_constraint(row, Relation::Eq, S::from_int(n as i64));
    }
    for i in 0..n {
        let mut row = vec![S::zero(); m * n];
        for s in 0..m {
            row[s * n + i] = S::one();
        }
        lp.add_constraint(row, Relation::Eq, S::from_int(m as i64));
    }
    let sol = solve_lp(&lp)?;
    let value = -sol.optimal_value()? + primal_constant(sites);
    Ok((sol.solution, value))
}

/// The Fermat–Weber polytrope together with the optimal value.
pub fn fw_polytrope_with_value<S: Scalar>(sites: &SiteSet<S>) -> Result<(Polytrope<S>, S)> {
    let n = sites.dim();
    let (plan, value) = transport_solution(sites)?;
    // Basic transport solutions are integral, so float support tests can use 1/2.
    let in_support = |y: &S| match S::MODE {
        Arithmetic::Exact => y.is_positive(),
        Arithmetic::Float => y.to_f64_lossy() > 0.5,
    };
    let mut bounds: Vec<Vec<Option<S>>> = vec![vec![None; n]; n];
    for (s, site) in sites.sites().iter().enumerate() {
        for i in 0..n {
            if !in_support(&plan[s * n + i]) {
                continue;
            }
            // t_i − t_j ≤ s_i − s_j, i.e. c[j][i] ≤ s_i − s_j.
            for j in 0..n {
                if j == i {
                    continue;
                }
                let bound = site[i].clone() - site[j].clone();
                let slot = &mut bounds[j][i];
                if slot.as_ref().is_none_or(|cur| bound < *cur) {
                    *slot = Some(bound);
                }
            }
        }
    }
    Ok((Polytrope::from_bounds(bounds)?, value))
}

pub fn fw_polytrope<S: Scalar>(sites: &SiteSet<S>) -> Result<Polytrope<S>> {
    Ok(fw_polytrope_with_value(sites)?.0)
}

/// The same polytrope from `n(n−1) + 1` linear programs: the optimal value,
/// then `max t_j − t_i` over the optimal face for every ordered pair. Slow;
/// kept as an independent route for cross-checking.
pub fn fw_polytrope_by_suprema<S: Scalar>(sites: &SiteSet<S>) -> Result<Polytrope<S>> {
    let n = sites.dim();
    let value = fw_value(sites)?;
    let base = primal_program(sites);
    let width = base.num_vars();
    let mut face = base.clone();
    let budget = value - primal_constant(sites);
    face.add_constraint(base.objective.clone(), Relation::Le, budget);
    face.objective = vec![S::zero(); width];

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let sups: Vec<Result<S>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            // t_{n−1} is pinned to zero and has no column.
            let mut lp = face.clone();
            if i < n - 1 {
                lp.objective[i] = S::one();
            }
            if j < n - 1 {
                lp.objective[j] = -S::one();
            }
            Ok(-solve_lp(&lp)?.optimal_value()?)
        })
        .collect();
    let mut bounds: Vec<Vec<Option<S>>> = vec![vec![None; n]; n];
    for (&(i, j), sup) in pairs.iter().zip(sups) {
        bounds[i][j] = Some(sup?);
    }
    Polytrope::from_bounds(bounds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianResult<S> {
    pub median: TorusPoint<S>,
    pub vertices: Vec<TorusPoint<S>>,
    pub fw_value: S,
    pub dimension: usize,
    /// Index (into the input sites) dropped by the `m ≡ 0 (mod n)` rule.
    pub degenerate_drop: Option<usize>,
    /// Whether the median was replaced by its subdominant ultrametric.
    pub subdominant_applied: bool,
}

/// Arithmetic mean of the tropical vertices of `FW(S)`, each taken in
/// canonical form (last coordinate zero).
pub fn tropical_median<S: Scalar>(sites: &SiteSet<S>) -> Result<MedianResult<S>> {
    if sites.len() == 1 {
        let p = canonicalize(&sites.sites()[0]);
        return Ok(MedianResult {
            median: p.clone(),
            vertices: vec![p],
            fw_value: S::zero(),
            dimension: 0,
            degenerate_drop: None,
            subdominant_applied: false,
        });
    }
    let (polytrope, value) = fw_polytrope_with_value(sites)?;
    let vertices = polytrope.tropical_vertices();
    let count = S::from_int(vertices.len() as i64);
    let n = sites.dim();
    let mean: Vec<S> = (0..n)
        .map(|i| sum(vertices.iter().map(|v| v[i].clone())) / count.clone())
        .collect();
    Ok(MedianResult {
        median: TorusPoint::new(mean)?,
        vertices,
        fw_value: value,
        dimension: polytrope.dimension(),
        degenerate_drop: None,
        subdominant_applied: false,
    })
}

/// Site with the largest total distance to all other sites, smallest index on ties.
pub fn most_remote_site<S: Scalar>(sites: &SiteSet<S>) -> usize {
    let mut best: Option<(usize, S)> = None;
    for (i, s) in sites.sites().iter().enumerate() {
        let total = sum(sites
            .sites()
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, o)| asym_dist_unchecked(s.coords(), o.coords())));
        if best.as_ref().is_none_or(|(_, b)| total > *b) {
            best = Some((i, total));
        }
    }
    best.expect("nonempty").0
}

/// Tropical median with the corrections used for tree data.
///
/// In tree mode every site must be an ultrametric (exact) or an
/// ε-ultrametric with `ε ≤ √ε₀` (float). In float mode, when the number of
/// sites is a multiple of the dimension, the most remote site is dropped
/// first. The median is then shifted so that its largest coordinate is the
/// mean of the sites' largest coordinates (the consensus height is the mean
/// height), and in float mode a median whose `min_eps` exceeds `√ε₀` is
/// replaced by its subdominant ultrametric.
pub fn corrected_tropical_median<S: Scalar>(
    sites: &SiteSet<S>,
    tree_mode: bool,
) -> Result<MedianResult<S>> {
    if !tree_mode {
        return tropical_median(sites);
    }
    let n = sites.dim();
    let map = PairIndexMap::for_len(n)?;
    let threshold = sqrt_machine_epsilon();
    for (i, site) in sites.sites().iter().enumerate() {
        let pv = PairVector::from_point(map.clone(), site)?;
        if !pv.is_ultrametric() {
            return Err(Error::NotUltrametric(format!("site {i}")));
        }
    }

    let m = sites.len();
    let float = S::MODE == Arithmetic::Float;
    let (working, drop) = if float && m > 1 && m.is_multiple_of(n) {
        let drop = most_remote_site(sites);
        let keep: Vec<usize> = (0..m).filter(|&i| i != drop).collect();
        (sites.subset(&keep)?, Some(drop))
    } else {
        (sites.clone(), None)
    };

    let mut result = tropical_median(&working)?;
    result.degenerate_drop = drop;

    let target_max = sum(working.sites().iter().map(|s| s.max_coord()))
        / S::from_int(working.len() as i64);
    let shift = target_max - result.median.max_coord();
    result.median = result.median.shifted(&shift);

    if float {
        let pv = PairVector::from_point(map, &result.median)?;
        let needs_fix = pv
            .min_eps()
            .is_none_or(|eps| eps.to_f64_lossy() > threshold);
        if needs_fix {
            result.median = pv.subdominant_ultrametric().point()?;
            result.subdominant_applied = true;
        }
    }
    Ok(result)
}
