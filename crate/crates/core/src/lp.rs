//! Dense two-phase primal simplex over any [`Scalar`].
//!
//! Pricing is Dantzig's most-negative reduced cost; after a degenerate pivot
//! the solver switches to Bland's smallest-index rule until the objective
//! moves again, which rules out cycling. All ties break on the smallest
//! index, so a given program always produces the same pivot sequence.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, DEFAULT_TOLERANCE};

const MAX_REPRICES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub relation: Relation,
    pub rhs: S,
}

impl<S: Scalar> Constraint<S> {
    pub fn new(coeffs: Vec<S>, relation: Relation, rhs: S) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }
}

/// `minimize objective · x` subject to the constraint rows and per-variable
/// bounds. Variables without bounds are free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
    pub bounds: Vec<(Option<S>, Option<S>)>,
}

impl<S: Scalar> LinearProgram<S> {
    /// A program over `num_vars` free variables with a zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![S::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![(None, None); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<S>, relation: Relation, rhs: S) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn set_lower(&mut self, var: usize, lower: S) {
        self.bounds[var].0 = Some(lower);
    }

    pub fn set_upper(&mut self, var: usize, upper: S) {
        self.bounds[var].1 = Some(upper);
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.objective.len();
        if self.bounds.len() != width {
            return Err(Error::MalformedLp(format!(
                "{} bounds for {width} variables",
                self.bounds.len()
            )));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != width {
                return Err(Error::MalformedLp(format!(
                    "row {i} has width {}, objective has {width}",
                    row.coeffs.len()
                )));
            }
        }
        Ok(())
    }

    /// Objective value at `x`.
    pub fn evaluate(&self, x: &[S]) -> S {
        dot(&self.objective, x)
    }

    /// Whether `x` satisfies every row and bound up to `tol`.
    pub fn is_feasible(&self, x: &[S], tol: f64) -> bool {
        let rows_ok = self.constraints.iter().all(|row| {
            let lhs = dot(&row.coeffs, x);
            let slack = lhs - row.rhs.clone();
            match row.relation {
                Relation::Le => !slack.is_pos(tol),
                Relation::Ge => !slack.is_neg(tol),
                Relation::Eq => slack.is_zero_tol(tol),
            }
        });
        let bounds_ok = self.bounds.iter().zip(x).all(|((lo, hi), v)| {
            lo.as_ref().is_none_or(|lo| !(lo.clone() - v.clone()).is_pos(tol))
                && hi.as_ref().is_none_or(|hi| !(v.clone() - hi.clone()).is_pos(tol))
        });
        rows_ok && bounds_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    /// Objective value; zero unless `status` is optimal.
    pub value: S,
    pub solution: Vec<S>,
    /// One multiplier per constraint row (bounds excluded), signed so that
    /// `objective - Σ duals[i]·row_i` is the vector of reduced costs:
    /// `≤` rows carry nonpositive, `≥` rows nonnegative multipliers.
    pub duals: Vec<S>,
}

impl<S: Scalar> LpSolution<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// The value if optimal, otherwise an [`Error::LpStatus`].
    pub fn optimal_value(&self) -> Result<S> {
        match self.status {
            LpStatus::Optimal => Ok(self.value.clone()),
            LpStatus::Infeasible => Err(Error::LpStatus("infeasible")),
            LpStatus::Unbounded => Err(Error::LpStatus("unbounded")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Absolute feasibility and optimality tolerance (ignored in exact mode).
    pub tolerance: f64,
    pub max_pivots: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_pivots: 1_000_000,
        }
    }
}

pub fn solve_lp<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>> {
    solve_lp_with(lp, &LpOptions::default())
}

pub fn solve_lp_with<S: Scalar>(lp: &LinearProgram<S>, opts: &LpOptions) -> Result<LpSolution<S>> {
    lp.validate()?;
    let standard = StandardForm::build(lp);
    let mut tableau = Tableau::new(&standard, opts.tolerance);

    tableau.run_phase_one(opts.max_pivots)?;
    if tableau.objective_value().is_pos(opts.tolerance) {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            value: S::zero(),
            solution: Vec::new(),
            duals: Vec::new(),
        });
    }
    tableau.evict_artificials();

    if !tableau.run_phase_two(&standard.cost, opts.max_pivots)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: S::zero(),
            solution: Vec::new(),
            duals: Vec::new(),
        });
    }

    let columns = tableau.column_values();
    let solution = standard.recover(&columns);
    let value = lp.evaluate(&solution);
    let duals = standard.row_duals(&tableau, lp.constraints.len());
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        solution,
        duals,
    })
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// How an original variable is expressed through nonnegative columns:
/// `x = offset + sign·col (− neg_col)`.
#[derive(Debug, Clone)]
struct VarMap<S> {
    col: usize,
    negate: bool,
    neg_col: Option<usize>,
    offset: S,
}

/// Row kinds after normalizing to a nonnegative right-hand side.
#[derive(Debug, Clone, Copy)]
enum RowKind {
    Le,
    Ge,
    Eq,
}

struct StandardForm<S> {
    vars: Vec<VarMap<S>>,
    /// Structural columns only.
    num_structural: usize,
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    kinds: Vec<RowKind>,
    /// Whether the row was multiplied by −1 to make the rhs nonnegative.
    flipped: Vec<bool>,
    cost: Vec<S>,
}

impl<S: Scalar> StandardForm<S> {
    fn build(lp: &LinearProgram<S>) -> Self {
        let mut vars = Vec::with_capacity(lp.num_vars());
        let mut next = 0usize;
        // Upper-bound rows for doubly bounded variables: (column, limit).
        let mut extra_rows: Vec<(usize, S)> = Vec::new();
        for (lo, hi) in &lp.bounds {
            let map = match (lo, hi) {
                (Some(lo), hi) => {
                    if let Some(hi) = hi {
                        extra_rows.push((next, hi.clone() - lo.clone()));
                    }
                    VarMap {
                        col: next,
                        negate: false,
                        neg_col: None,
                        offset: lo.clone(),
                    }
                }
                (None, Some(hi)) => VarMap {
                    col: next,
                    negate: true,
                    neg_col: None,
                    offset: hi.clone(),
                },
                (None, None) => {
                    next += 1;
                    VarMap {
                        col: next - 1,
                        negate: false,
                        neg_col: Some(next),
                        offset: S::zero(),
                    }
                }
            };
            next += 1;
            vars.push(map);
        }
        let num_structural = next;

        let expand = |coeffs: &[S]| -> (Vec<S>, S) {
            let mut row = vec![S::zero(); num_structural];
            let mut shift = S::zero();
            for (a, map) in coeffs.iter().zip(&vars) {
                if a.is_zero() {
                    continue;
                }
                shift = shift + a.clone() * map.offset.clone();
                row[map.col] = if map.negate { -a.clone() } else { a.clone() };
                if let Some(nc) = map.neg_col {
                    row[nc] = -a.clone();
                }
            }
            (row, shift)
        };

        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut kinds = Vec::new();
        let mut flipped = Vec::new();
        let mut push = |mut row: Vec<S>, mut b: S, rel: Relation| {
            let flip = b.is_negative();
            let mut rel = rel;
            if flip {
                row.iter_mut().for_each(|v| *v = -v.clone());
                b = -b;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push(row);
            rhs.push(b);
            kinds.push(match rel {
                Relation::Le => RowKind::Le,
                Relation::Ge => RowKind::Ge,
                Relation::Eq => RowKind::Eq,
            });
            flipped.push(flip);
        };

        for c in &lp.constraints {
            let (row, shift) = expand(&c.coeffs);
            push(row, c.rhs.clone() - shift, c.relation);
        }
        for (col, limit) in extra_rows {
            let mut row = vec![S::zero(); num_structural];
            row[col] = S::one();
            push(row, limit, Relation::Le);
        }

        let (cost, _) = expand(&lp.objective);
        StandardForm {
            vars,
            num_structural,
            rows,
            rhs,
            kinds,
            flipped,
            cost,
        }
    }

    fn recover(&self, columns: &[S]) -> Vec<S> {
        self.vars
            .iter()
            .map(|m| {
                let mut v = columns[m.col].clone();
                if m.negate {
                    v = -v;
                }
                if let Some(nc) = m.neg_col {
                    v = v - columns[nc].clone();
                }
                m.offset.clone() + v
            })
            .collect()
    }

    fn row_duals(&self, tableau: &Tableau<S>, count: usize) -> Vec<S> {
        (0..count)
            .map(|i| {
                let y = tableau.row_multiplier(i);
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}

/// Column layout: structural | one auxiliary per row (slack, surplus or
/// none) | one artificial per row. The last entry of every row is the rhs.
struct Tableau<S> {
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    reduced: Vec<S>,
    value: S,
    num_structural: usize,
    num_rows: usize,
    /// Column of the slack/surplus of each row, if any.
    aux_col: Vec<Option<usize>>,
    kinds: Vec<RowKind>,
    tol: f64,
}

impl<S: Scalar> Tableau<S> {
    fn new(sf: &StandardForm<S>, tol: f64) -> Self {
        let m = sf.rows.len();
        let ns = sf.num_structural;
        let mut aux_col = Vec::with_capacity(m);
        let mut next = ns;
        for kind in &sf.kinds {
            match kind {
                RowKind::Le | RowKind::Ge => {
                    aux_col.push(Some(next));
                    next += 1;
                }
                RowKind::Eq => aux_col.push(None),
            }
        }
        let art_start = next;
        let width = art_start + m + 1;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = vec![S::zero(); width];
            row[..ns].clone_from_slice(&sf.rows[i]);
            if let Some(c) = aux_col[i] {
                row[c] = match sf.kinds[i] {
                    RowKind::Le => S::one(),
                    _ => -S::one(),
                };
            }
            row[art_start + i] = S::one();
            row[width - 1] = sf.rhs[i].clone();
            // A slack with nonnegative rhs is already a feasible basic column.
            match (sf.kinds[i], aux_col[i]) {
                (RowKind::Le, Some(c)) => basis.push(c),
                _ => basis.push(art_start + i),
            }
            rows.push(row);
        }

        let mut tab = Tableau {
            rows,
            basis,
            reduced: vec![S::zero(); width - 1],
            value: S::zero(),
            num_structural: ns,
            num_rows: m,
            aux_col,
            kinds: sf.kinds.clone(),
            tol,
        };
        let phase_one_cost: Vec<S> = (0..width - 1)
            .map(|j| if tab.is_artificial(j) { S::one() } else { S::zero() })
            .collect();
        tab.price(&phase_one_cost);
        tab
    }

    fn art_start(&self) -> usize {
        self.width() - self.num_rows
    }

    fn width(&self) -> usize {
        self.reduced.len()
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.art_start()
    }

    fn rhs(&self, row: usize) -> &S {
        &self.rows[row][self.width()]
    }

    fn objective_value(&self) -> S {
        self.value.clone()
    }

    /// Recomputes reduced costs and the objective for `cost` under the
    /// current basis.
    fn price(&mut self, cost: &[S]) {
        let w = self.width();
        let mut reduced: Vec<S> = cost.iter().take(w).cloned().collect();
        reduced.resize(w, S::zero());
        let mut value = S::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost.get(b).cloned().unwrap_or_else(S::zero);
            if cb.is_zero() {
                continue;
            }
            for (j, r) in reduced.iter_mut().enumerate() {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    *r = r.clone() - cb.clone() * a.clone();
                }
            }
            value = value + cb * self.rhs(i).clone();
        }
        self.reduced = reduced;
        self.value = value;
    }

    fn choose_entering(&self, allow_artificial: bool, bland: bool) -> Option<usize> {
        let limit = if allow_artificial {
            self.width()
        } else {
            self.art_start()
        };
        let mut best: Option<usize> = None;
        for j in 0..limit {
            if !self.reduced[j].is_neg(self.tol) {
                continue;
            }
            if bland {
                return Some(j);
            }
            match best {
                Some(b) if self.reduced[j] >= self.reduced[b] => {}
                _ => best = Some(j),
            }
        }
        best
    }

    fn choose_leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for i in 0..self.num_rows {
            let a = &self.rows[i][col];
            if !a.is_pos(self.tol) {
                continue;
            }
            let ratio = self.rhs(i).clone() / a.clone();
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let better = if ratio.approx_eq(&br, self.tol) {
                        self.basis[i] < self.basis[bi]
                    } else {
                        ratio < br
                    };
                    if better {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.rows[row][col].clone();
        let pivot_row: Vec<S> = self.rows[row].iter().map(|v| v.clone() / p.clone()).collect();
        self.rows[row] = pivot_row.clone();
        let nonzero: Vec<usize> = (0..=w).filter(|&j| !pivot_row[j].is_zero()).collect();
        let tol = self.tol;

        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &nonzero {
                let v = r[j].clone() - f.clone() * pivot_row[j].clone();
                r[j] = snap(v, tol);
            }
            r[col] = S::zero();
        }

        let f = self.reduced[col].clone();
        if !f.is_zero() {
            for &j in &nonzero {
                if j < w {
                    let v = self.reduced[j].clone() - f.clone() * pivot_row[j].clone();
                    self.reduced[j] = snap(v, tol);
                }
            }
            self.reduced[col] = S::zero();
            self.value = self.value.clone() + f * pivot_row[w].clone();
        }
        self.basis[row] = col;
    }

    /// Returns false if the program is unbounded.
    fn iterate(&mut self, allow_artificial: bool, max_pivots: usize) -> Result<bool> {
        let mut bland = false;
        for _ in 0..max_pivots {
            let Some(col) = self.choose_entering(allow_artificial, bland) else {
                return Ok(true);
            };
            let Some(row) = self.choose_leaving(col) else {
                return Ok(false);
            };
            let before = self.value.clone();
            self.pivot(row, col);
            bland = self.value.approx_eq(&before, self.tol);
        }
        Err(Error::InvalidArgument(format!(
            "simplex exceeded {max_pivots} pivots"
        )))
    }

    fn run_phase_one(&mut self, max_pivots: usize) -> Result<()> {
        let bounded = self.iterate(true, max_pivots)?;
        debug_assert!(bounded, "phase one is bounded below by zero");
        Ok(())
    }

    /// Pivots basic artificials (all at level zero) out of the basis where a
    /// structural or auxiliary column can replace them. Rows where none can
    /// are redundant and keep their artificial at zero.
    fn evict_artificials(&mut self) {
        for i in 0..self.num_rows {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let replacement =
                (0..self.art_start()).find(|&j| !self.rows[i][j].is_zero_tol(self.tol));
            if let Some(j) = replacement {
                self.pivot(i, j);
            }
        }
    }

    fn run_phase_two(&mut self, structural_cost: &[S], max_pivots: usize) -> Result<bool> {
        let mut cost = vec![S::zero(); self.width()];
        cost[..self.num_structural].clone_from_slice(structural_cost);
        self.price(&cost);
        // Reduced costs drift under float pivoting; re-price until a fresh
        // pricing confirms optimality.
        for _ in 0..MAX_REPRICES {
            if !self.iterate(false, max_pivots)? {
                return Ok(false);
            }
            self.price(&cost);
            if self.choose_entering(false, false).is_none() {
                return Ok(true);
            }
        }
        Ok(true)
    }

    fn column_values(&self) -> Vec<S> {
        let mut x = vec![S::zero(); self.num_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                x[b] = self.rhs(i).clone();
            }
        }
        x
    }

    /// Simplex multiplier of a (normalized) row, read off the reduced cost of
    /// the column that was the identity for that row.
    fn row_multiplier(&self, row: usize) -> S {
        match (self.kinds[row], self.aux_col[row]) {
            (RowKind::Le, Some(c)) => -self.reduced[c].clone(),
            (RowKind::Ge, Some(c)) => self.reduced[c].clone(),
            _ => -self.reduced[self.art_start() + row].clone(),
        }
    }
}

/// Rounds float noise far below the tolerance to zero; exact values pass through.
fn snap<S: Scalar>(v: S, tol: f64) -> S {
    if v.is_zero_tol(tol * 1e-6) {
        S::zero()
    } else {
        v
    }
}
