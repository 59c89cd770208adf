//! Dense tableau simplex for small linear programs, plus an exhaustive
//! vertex-enumeration oracle used to check it.
//!
//! Programs are stated as `maximize c·x subject to A x ≤ b` with optional
//! per-variable bounds. Equalities are written by callers as two opposite
//! inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;
const MAX_PIVOTS: usize = 1_000_000;

/// Largest program [`enumerate_oracle`] accepts.
pub const ORACLE_MAX_VARS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<Option<f64>>,
    upper: Vec<Option<f64>>,
}

impl LinearProgram {
    /// Maximize `objective · x`; all variables start free.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            num_vars: n,
            objective,
            constraints: Vec::new(),
            lower: vec![None; n],
            upper: vec![None; n],
        }
    }

    /// Adds `coeffs · x ≤ bound`.
    pub fn constraint(mut self, coeffs: Vec<f64>, bound: f64) -> Self {
        self.push_constraint(coeffs, bound);
        self
    }

    pub fn push_constraint(&mut self, coeffs: Vec<f64>, bound: f64) {
        self.constraints.push(Constraint { coeffs, bound });
    }

    pub fn bounds(mut self, var: usize, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.set_bounds(var, lower, upper);
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<f64>, upper: Option<f64>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Sets a lower bound of zero on every variable.
    pub fn nonnegative(mut self) -> Self {
        self.lower.iter_mut().for_each(|l| *l = Some(0.0));
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_vars == 0 {
            return Err(Error::InvalidProgram("no variables".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProgram("non-finite objective".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(Error::InvalidProgram(format!(
                    "row {i} has {} coefficients, expected {}",
                    c.coeffs.len(),
                    self.num_vars
                )));
            }
            if c.coeffs.iter().any(|a| !a.is_finite()) || !c.bound.is_finite() {
                return Err(Error::InvalidProgram(format!("row {i} is not finite")));
            }
        }
        for j in 0..self.num_vars {
            let finite = |b: Option<f64>| b.is_none_or(f64::is_finite);
            if !finite(self.lower[j]) || !finite(self.upper[j]) {
                return Err(Error::InvalidProgram(format!("bound on x{j} is not finite")));
            }
        }
        Ok(())
    }

    /// Constraints followed by the variable bounds, all as `a·x ≤ b` rows.
    pub fn inequality_rows(&self) -> Vec<Constraint> {
        let mut rows = self.constraints.clone();
        for j in 0..self.num_vars {
            if let Some(l) = self.lower[j] {
                let mut a = vec![0.0; self.num_vars];
                a[j] = -1.0;
                rows.push(Constraint { coeffs: a, bound: -l });
            }
            if let Some(u) = self.upper[j] {
                let mut a = vec![0.0; self.num_vars];
                a[j] = 1.0;
                rows.push(Constraint { coeffs: a, bound: u });
            }
        }
        rows
    }

    /// Largest violation of any row or bound at `x` (zero when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.inequality_rows()
            .iter()
            .map(|r| dot(&r.coeffs, x) - r.bound)
            .fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `x` is empty and `value` is −∞ (infeasible) or +∞
/// (unbounded) unless the status is optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
}

impl LpSolution {
    fn infeasible() -> Self {
        Self {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            value: f64::NEG_INFINITY,
        }
    }

    fn unbounded() -> Self {
        Self {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            value: f64::INFINITY,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// x_j = offset + Σ sign·y over the listed standard-form columns.
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    /// Row index of the objective row.
    fn obj(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, r: usize, s: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > MAX_PIVOTS {
            return Err(Error::IterationLimit(MAX_PIVOTS));
        }
        let w = self.width;
        let p = self.at(r, s);
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        prow.iter_mut().for_each(|v| *v /= p);
        prow[s] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[s];
            if f != 0.0 {
                row.iter_mut().zip(prow.iter()).for_each(|(v, pv)| *v -= f * pv);
                row[s] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[r] = s;
        Ok(())
    }

    /// Bland's rule iterations on the objective row; `allowed` filters
    /// entering columns. Returns false if the objective is unbounded.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> Result<bool> {
        let obj = self.obj();
        loop {
            let entering = (0..self.width - 1).find(|&j| allowed(j) && self.at(obj, j) > COST_EPS);
            let Some(s) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, s);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, s)?,
            }
        }
    }

    /// Loads `cost` (maximization) into the objective row in reduced form.
    fn set_objective(&mut self, cost: &[f64]) {
        let obj = self.obj();
        let w = self.width;
        for j in 0..w {
            self.data[obj * w + j] = if j < cost.len() { cost[j] } else { 0.0 };
        }
        for i in 0..self.rows {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..w {
                    self.data[obj * w + j] -= cb * self.data[i * w + j];
                }
            }
        }
    }
}

/// Solves `lp` with a two-phase dense simplex using Bland's rule.
///
/// Infeasible and unbounded programs are reported through the status, not
/// as errors; errors are reserved for malformed input.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars;

    // standard form: every column y ≥ 0
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut extra_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for j in 0..n {
        match (lp.lower[j], lp.upper[j]) {
            (Some(l), up) => {
                maps.push(VarMap {
                    offset: l,
                    cols: vec![(ncols, 1.0)],
                });
                if let Some(u) = up {
                    extra_rows.push((vec![(ncols, 1.0)], u - l));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap {
                    offset: u,
                    cols: vec![(ncols, -1.0)],
                });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap {
                    offset: 0.0,
                    cols: vec![(ncols, 1.0), (ncols + 1, -1.0)],
                });
                ncols += 2;
            }
        }
    }

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(lp.constraints.len() + extra_rows.len());
    for c in &lp.constraints {
        let mut a = vec![0.0; ncols];
        let mut b = c.bound;
        for (j, m) in maps.iter().enumerate() {
            let cj = c.coeffs[j];
            if cj != 0.0 {
                b -= cj * m.offset;
                for &(col, sign) in &m.cols {
                    a[col] += cj * sign;
                }
            }
        }
        rows.push((a, b));
    }
    for (entries, b) in extra_rows {
        let mut a = vec![0.0; ncols];
        for (col, v) in entries {
            a[col] = v;
        }
        rows.push((a, b));
    }
    let mut cost = vec![0.0; ncols];
    for (j, m) in maps.iter().enumerate() {
        for &(col, sign) in &m.cols {
            cost[col] += lp.objective[j] * sign;
        }
    }

    let m = rows.len();
    let negative: Vec<usize> = (0..m).filter(|&i| rows[i].1 < 0.0).collect();
    let nart = negative.len();
    let art_start = ncols + m;
    let width = ncols + m + nart + 1;
    let mut t = Tableau {
        rows: m,
        width,
        data: vec![0.0; (m + 1) * width],
        basis: vec![0; m],
        pivots: 0,
    };
    let mut next_art = art_start;
    for (i, (a, b)) in rows.iter().enumerate() {
        let row = &mut t.data[i * width..(i + 1) * width];
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for (dst, src) in row.iter_mut().zip(a) {
            *dst = sign * src;
        }
        row[ncols + i] = sign;
        row[width - 1] = sign * b;
        if *b < 0.0 {
            row[next_art] = 1.0;
            t.basis[i] = next_art;
            next_art += 1;
        } else {
            t.basis[i] = ncols + i;
        }
    }

    if nart > 0 {
        let mut phase1 = vec![0.0; width - 1];
        phase1[art_start..].iter_mut().for_each(|c| *c = -1.0);
        t.set_objective(&phase1);
        t.run(|_| true)?;
        let infeas = t.rhs(t.obj());
        // rhs of the objective row holds minus the objective value
        if infeas > FEAS_TOL {
            return Ok(LpSolution::infeasible());
        }
        for i in 0..m {
            if t.basis[i] >= art_start {
                if let Some(s) = (0..art_start).find(|&j| t.at(i, j).abs() > PIVOT_EPS) {
                    t.pivot(i, s)?;
                }
            }
        }
    }

    let mut full_cost = cost.clone();
    full_cost.resize(width - 1, 0.0);
    t.set_objective(&full_cost);
    if !t.run(|j| j < art_start)? {
        return Ok(LpSolution::unbounded());
    }

    let mut y = vec![0.0; width - 1];
    for i in 0..m {
        y[t.basis[i]] = t.rhs(i);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|mp| mp.offset + mp.cols.iter().map(|&(c, s)| s * y[c]).sum::<f64>())
        .collect();
    let value = lp.evaluate(&x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        value,
    })
}

/// Solves a square system by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-11 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for j in col..n {
                    a[i][j] -= f * a[col][j];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Rank and, when the rank is `cols - 1`, a unit null vector.
fn null_direction(rows: &[&[f64]], cols: usize) -> (usize, Option<Vec<f64>>) {
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(piv) = (r..a.len()).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
        else {
            break;
        };
        if a[piv][c].abs() <= 1e-11 {
            continue;
        }
        a.swap(r, piv);
        let p = a[r][c];
        a[r].iter_mut().for_each(|v| *v /= p);
        for i in 0..a.len() {
            if i != r {
                let f = a[i][c];
                if f != 0.0 {
                    for j in 0..cols {
                        a[i][j] -= f * a[r][j];
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let rank = pivot_cols.len();
    if rank + 1 != cols {
        return (rank, None);
    }
    let free = (0..cols).find(|c| !pivot_cols.contains(c)).unwrap();
    let mut d = vec![0.0; cols];
    d[free] = 1.0;
    for (row, &pc) in pivot_cols.iter().enumerate() {
        d[pc] = -a[row][free];
    }
    let norm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    d.iter_mut().for_each(|v| *v /= norm);
    (rank, Some(d))
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Ground-truth solve by enumerating every basic solution.
///
/// Each `num_vars`-subset of the rows (constraints and bounds) is solved as
/// a system of equalities; the best feasible one is the optimum. A feasible
/// program is unbounded exactly when an extreme ray of the recession cone
/// `{d : A d ≤ 0}` improves the objective, and those rays are the null
/// directions of `(num_vars − 1)`-subsets of rows. The constraint matrix
/// must have full column rank so that the feasible set has vertices.
pub fn enumerate_oracle(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars;
    if n > ORACLE_MAX_VARS {
        return Err(Error::InvalidProgram(format!(
            "oracle handles at most {ORACLE_MAX_VARS} variables, got {n}"
        )));
    }
    let rows = lp.inequality_rows();
    let coeffs: Vec<&[f64]> = rows.iter().map(|r| r.coeffs.as_slice()).collect();
    if null_direction(&coeffs, n).0 < n {
        return Err(Error::InvalidProgram(
            "oracle needs a constraint matrix of full column rank".into(),
        ));
    }
    let feasible = |x: &[f64]| {
        rows.iter()
            .all(|r| dot(&r.coeffs, x) <= r.bound + FEAS_TOL * (1.0 + r.bound.abs()))
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_subset(rows.len(), n, |sel| {
        let a = sel.iter().map(|&i| rows[i].coeffs.clone()).collect();
        let b = sel.iter().map(|&i| rows[i].bound).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v = lp.evaluate(&x);
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, x));
                }
            }
        }
    });
    let Some((value, x)) = best else {
        return Ok(LpSolution::infeasible());
    };

    let mut unbounded = false;
    for_each_subset(rows.len(), n - 1, |sel| {
        if unbounded {
            return;
        }
        let sub: Vec<&[f64]> = sel.iter().map(|&i| coeffs[i]).collect();
        if let (_, Some(d)) = null_direction(&sub, n) {
            for sign in [1.0, -1.0] {
                let d: Vec<f64> = d.iter().map(|v| sign * v).collect();
                let in_cone = coeffs.iter().all(|a| dot(a, &d) <= 1e-9);
                if in_cone && lp.evaluate(&d) > 1e-9 {
                    unbounded = true;
                }
            }
        }
    });
    if unbounded {
        return Ok(LpSolution::unbounded());
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        value,
    })
}

/// A random program that is feasible and bounded by construction.
///
/// Variables are nonnegative; rows are drawn around a random interior point
/// (some with negative right-hand sides, so phase one is exercised) and a
/// final row `Σ x ≤ B` keeps the feasible set bounded.
pub fn random_feasible_lp(seed: u64, num_vars: usize, num_rows: usize) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = (0..num_vars).map(|_| rng.random_range(0.0..2.0)).collect();
    let objective = (0..num_vars).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut lp = LinearProgram::new(objective).nonnegative();
    for _ in 0..num_rows {
        let a: Vec<f64> = (0..num_vars).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = dot(&a, &x0) + rng.random_range(0.0..1.0);
        lp.push_constraint(a, b);
    }
    let total: f64 = x0.iter().sum::<f64>() + rng.random_range(0.5..3.0);
    lp.push_constraint(vec![1.0; num_vars], total);
    lp
}
