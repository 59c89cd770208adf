//! Finitely supported probability laws on ℝᴷ.
//!
//! A [`DiscreteMeasure`] keeps its atoms in lexicographic order with
//! duplicates merged, so two measures built from the same points and weights
//! compare equal regardless of input order. Everything here is immutable; the
//! operations return new values.

use std::cmp::Ordering;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the weight sum accepted from callers before renormalizing.
pub const INPUT_WEIGHT_TOL: f64 = 1e-9;
/// Tolerance for weight-sum identities between derived measures.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl DiscreteMeasure {
    /// Builds a measure from points and weights.
    ///
    /// Duplicate points are merged by summing their weights and zero-weight
    /// atoms are dropped. The weights must be nonnegative and sum to one
    /// within [`INPUT_WEIGHT_TOL`]; they are then rescaled to sum to one.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("points"));
        }
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "points and weights",
                left: points.len(),
                right: weights.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::Empty("point coordinates"));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("atom coordinates"));
            }
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite("weights"));
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { index, weight: w });
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > INPUT_WEIGHT_TOL {
            return Err(Error::WeightSum(total));
        }
        Ok(Self::from_parts_unchecked(dim, points, weights, total))
    }

    /// Equal weights on the given points (duplicates accumulate weight).
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Empty("points"));
        }
        Self::new(points, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(x: Vec<f64>) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    // Sorts, merges and renormalizes. Callers guarantee shape and sign.
    pub(crate) fn from_parts_unchecked(
        dim: usize,
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        total: f64,
    ) -> Self {
        let mut pairs: Vec<(Vec<f64>, f64)> = points
            .into_iter()
            .map(|p| p.into_iter().map(|x| x + 0.0).collect::<Vec<_>>())
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .collect();
        pairs.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut atoms: Vec<Vec<f64>> = Vec::with_capacity(pairs.len());
        let mut merged: Vec<f64> = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            match atoms.last() {
                Some(last) if lex_cmp(last, &p).is_eq() => *merged.last_mut().unwrap() += w,
                _ => {
                    atoms.push(p);
                    merged.push(w);
                }
            }
        }
        for w in &mut merged {
            *w /= total;
        }
        Self {
            dim,
            atoms,
            weights: merged,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.atoms
            .iter()
            .map(Vec::as_slice)
            .zip(self.weights.iter().copied())
    }

    /// Weight carried by `x`, zero if `x` is not an atom.
    pub fn mass_at(&self, x: &[f64]) -> f64 {
        self.atoms
            .binary_search_by(|a| lex_cmp(a, x))
            .map(|i| self.weights[i])
            .unwrap_or(0.0)
    }

    /// Same atom set and weights within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self
                .iter()
                .zip(other.iter())
                .all(|((a, wa), (b, wb))| lex_cmp(a, b).is_eq() && (wa - wb).abs() <= tol)
    }

    /// Law of the `k`-th coordinate (0-based).
    pub fn marginal(&self, k: usize) -> Result<DiscreteMeasure> {
        if k >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: k,
                dim: self.dim,
            });
        }
        let points = self.atoms.iter().map(|a| vec![a[k]]).collect();
        Ok(Self::from_parts_unchecked(
            1,
            points,
            self.weights.clone(),
            1.0,
        ))
    }

    pub fn marginals(&self) -> Vec<DiscreteMeasure> {
        (0..self.dim)
            .map(|k| self.marginal(k).expect("index in range"))
            .collect()
    }

    /// Support values of a 1-D measure, in increasing order.
    pub(crate) fn values_1d(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a[0])
    }

    /// P([u, ∞)): mass of atoms with every coordinate at least `u`.
    pub fn survival(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        Ok(self
            .iter()
            .filter(|(x, _)| x.iter().zip(u).all(|(a, b)| a >= b))
            .map(|(_, w)| w)
            .sum())
    }

    /// P((u, ∞)): the open-orthant counterpart of [`survival`](Self::survival).
    pub fn strict_survival(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        Ok(self
            .iter()
            .filter(|(x, _)| x.iter().zip(u).all(|(a, b)| a > b))
            .map(|(_, w)| w)
            .sum())
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }
}

/// Product of the coordinate laws of `p`.
pub fn product_of_marginals(p: &DiscreteMeasure) -> DiscreteMeasure {
    let margins = p.marginals();
    let mut points: Vec<Vec<f64>> = vec![Vec::with_capacity(p.dim())];
    let mut weights = vec![1.0];
    for m in &margins {
        let mut next_points = Vec::with_capacity(points.len() * m.len());
        let mut next_weights = Vec::with_capacity(points.len() * m.len());
        for (prefix, w) in points.iter().zip(&weights) {
            for (x, wx) in m.iter() {
                let mut q = prefix.clone();
                q.push(x[0]);
                next_points.push(q);
                next_weights.push(w * wx);
            }
        }
        points = next_points;
        weights = next_weights;
    }
    let total = weights.iter().sum();
    DiscreteMeasure::from_parts_unchecked(p.dim(), points, weights, total)
}

/// True iff every coordinate law of `p` and `q` has the same support and
/// weights within `tol`.
pub fn common_marginals_check(p: &DiscreteMeasure, q: &DiscreteMeasure, tol: f64) -> Result<bool> {
    p.check_dim(q.dim())?;
    Ok((0..p.dim()).all(|k| {
        let a = p.marginal(k).expect("index in range");
        let b = q.marginal(k).expect("index in range");
        a.approx_eq(&b, tol)
    }))
}

/// Per-axis candidate thresholds: the sorted union of atom coordinates of
/// all measures, preceded by one value below all of them.
fn candidate_grid(measures: &[&DiscreteMeasure], dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|k| {
            let mut vals: Vec<f64> = measures
                .iter()
                .flat_map(|m| m.atoms().iter().map(move |a| a[k]))
                .collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            let below = vals[0] - 1.0;
            std::iter::once(below).chain(vals).collect()
        })
        .collect()
}

/// Visits every point of the Cartesian product of `axes`.
pub(crate) fn for_each_grid_point(axes: &[Vec<f64>], mut f: impl FnMut(&[f64])) {
    if axes.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; axes.len()];
    let mut point: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        f(&point);
        let mut k = axes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                point[k] = axes[k][idx[k]];
                break;
            }
            idx[k] = 0;
            point[k] = axes[k][0];
        }
    }
}

/// sup over u of |P([u,∞)) − Q([u,∞))| by exhaustive evaluation on the
/// candidate grid. Survival functions of discrete laws only change value at
/// atom coordinates, so the grid sweep is exact.
pub fn survival_sup_distance_grid(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    p.check_dim(q.dim())?;
    let axes = candidate_grid(&[p, q], p.dim());
    let mut best = 0.0f64;
    for_each_grid_point(&axes, |u| {
        let d = (p.survival(u).unwrap() - q.survival(u).unwrap()).abs();
        best = best.max(d);
    });
    Ok(best)
}

/// sup over u of |P([u,∞)) − Q([u,∞))|.
///
/// Same value as [`survival_sup_distance_grid`]. The last two axes are
/// handled by a sweep with a range-add segment tree, so two-dimensional
/// empirical laws with tens of thousands of atoms stay cheap; any leading
/// axes are enumerated over the candidate grid.
pub fn survival_sup_distance(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    p.check_dim(q.dim())?;
    let signed = signed_difference(p, q);
    let dim = p.dim();
    if dim == 1 {
        return Ok(sweep_1d(signed.iter().map(|(x, w)| (x[0], *w)).collect()));
    }
    let lead = dim - 2;
    if lead == 0 {
        return Ok(sweep_2d(
            signed.iter().map(|(x, w)| (x[0], x[1], *w)).collect(),
        ));
    }
    let axes = candidate_grid(&[p, q], lead);
    let mut best = 0.0f64;
    for_each_grid_point(&axes, |u| {
        let items: Vec<(f64, f64, f64)> = signed
            .iter()
            .filter(|(x, _)| x[..lead].iter().zip(u).all(|(a, b)| a >= b))
            .map(|(x, w)| (x[lead], x[lead + 1], *w))
            .collect();
        best = best.max(sweep_2d(items));
    });
    Ok(best)
}

/// Atoms of P − Q with nonzero net mass, from a merge of the sorted supports.
pub(crate) fn signed_difference<'a>(
    p: &'a DiscreteMeasure,
    q: &'a DiscreteMeasure,
) -> Vec<(&'a [f64], f64)> {
    let (a, b) = (p.atoms(), q.atoms());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => lex_cmp(x, y),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        let (x, w) = match ord {
            Ordering::Less => {
                i += 1;
                (a[i - 1].as_slice(), p.weights()[i - 1])
            }
            Ordering::Greater => {
                j += 1;
                (b[j - 1].as_slice(), -q.weights()[j - 1])
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
                (a[i - 1].as_slice(), p.weights()[i - 1] - q.weights()[j - 1])
            }
        };
        if w != 0.0 {
            out.push((x, w));
        }
    }
    out
}

fn sweep_1d(mut items: Vec<(f64, f64)>) -> f64 {
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0f64;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < items.len() {
        let v = items[i].0;
        while i < items.len() && items[i].0 == v {
            acc += items[i].1;
            i += 1;
        }
        best = best.max(acc.abs());
    }
    best
}

fn sweep_2d(mut items: Vec<(f64, f64, f64)>) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    let mut ys: Vec<f64> = items.iter().map(|t| t.1).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut tree = RangeAddTree::new(ys.len());
    let mut best = 0.0f64;
    let mut i = 0;
    while i < items.len() {
        let v = items[i].0;
        while i < items.len() && items[i].0 == v {
            let r = ys.partition_point(|y| *y < items[i].1);
            // thresholds 0..=r see this atom
            tree.add(0, r, items[i].2);
            i += 1;
        }
        best = best.max(tree.max().abs()).max(tree.min().abs());
    }
    best
}

/// Range add over [lo, hi] with global max/min queries.
struct RangeAddTree {
    n: usize,
    max: Vec<f64>,
    min: Vec<f64>,
    lazy: Vec<f64>,
}

impl RangeAddTree {
    fn new(n: usize) -> Self {
        Self {
            n,
            max: vec![0.0; 4 * n],
            min: vec![0.0; 4 * n],
            lazy: vec![0.0; 4 * n],
        }
    }

    fn add(&mut self, lo: usize, hi: usize, v: f64) {
        self.add_rec(1, 0, self.n - 1, lo, hi, v);
    }

    fn add_rec(&mut self, node: usize, l: usize, r: usize, lo: usize, hi: usize, v: f64) {
        if hi < l || r < lo {
            return;
        }
        if lo <= l && r <= hi {
            self.max[node] += v;
            self.min[node] += v;
            self.lazy[node] += v;
            return;
        }
        let mid = (l + r) / 2;
        self.add_rec(2 * node, l, mid, lo, hi, v);
        self.add_rec(2 * node + 1, mid + 1, r, lo, hi, v);
        self.max[node] = self.max[2 * node].max(self.max[2 * node + 1]) + self.lazy[node];
        self.min[node] = self.min[2 * node].min(self.min[2 * node + 1]) + self.lazy[node];
    }

    fn max(&self) -> f64 {
        self.max[1]
    }

    fn min(&self) -> f64 {
        self.min[1]
    }
}

/// Joint law of a pair (X, X′), stored as a measure on ℝ²ᴷ whose first `K`
/// coordinates are X and last `K` are X′.
#[derive(Debug, Clone)]
pub struct Coupling {
    base: DiscreteMeasure,
    left: DiscreteMeasure,
    right: DiscreteMeasure,
}

fn project(base: &DiscreteMeasure, range: std::ops::Range<usize>) -> DiscreteMeasure {
    let points = base.atoms().iter().map(|a| a[range.clone()].to_vec()).collect();
    DiscreteMeasure::from_parts_unchecked(range.len(), points, base.weights().to_vec(), 1.0)
}

impl Coupling {
    /// Wraps a measure on ℝ²ᴷ; the projections become the coupled laws.
    pub fn new(base: DiscreteMeasure) -> Result<Self> {
        if !base.dim().is_multiple_of(2) {
            return Err(Error::OutOfRange(format!(
                "coupling base must have even dimension, got {}",
                base.dim()
            )));
        }
        let k = base.dim() / 2;
        let left = project(&base, 0..k);
        let right = project(&base, k..2 * k);
        Ok(Self { base, left, right })
    }

    /// Like [`Coupling::new`], additionally checking the projections against
    /// the stated marginal laws.
    pub fn with_marginals(
        base: DiscreteMeasure,
        left: &DiscreteMeasure,
        right: &DiscreteMeasure,
    ) -> Result<Self> {
        let c = Self::new(base)?;
        left.check_dim(c.left.dim())?;
        right.check_dim(c.right.dim())?;
        if !c.left.approx_eq(left, WEIGHT_TOL) || !c.right.approx_eq(right, WEIGHT_TOL) {
            return Err(Error::MarginalsDiffer { tol: WEIGHT_TOL });
        }
        Ok(c)
    }

    /// Pairs (xᵢ, x′ᵢ) with the given weights.
    pub fn from_pairs(pairs: &[(Vec<f64>, Vec<f64>)], weights: Vec<f64>) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|(x, y)| {
                if x.len() != y.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.len(),
                        got: y.len(),
                    });
                }
                Ok(x.iter().chain(y).copied().collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::new(DiscreteMeasure::new(points, weights)?)
    }

    /// The product coupling P ⊗ Q.
    pub fn independent(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<Self> {
        p.check_dim(q.dim())?;
        let mut points = Vec::with_capacity(p.len() * q.len());
        let mut weights = Vec::with_capacity(p.len() * q.len());
        for (x, wx) in p.iter() {
            for (y, wy) in q.iter() {
                points.push(x.iter().chain(y).copied().collect());
                weights.push(wx * wy);
            }
        }
        let total = weights.iter().sum();
        Self::new(DiscreteMeasure::from_parts_unchecked(
            2 * p.dim(),
            points,
            weights,
            total,
        ))
    }

    /// X′ = X.
    pub fn diagonal(p: &DiscreteMeasure) -> Self {
        let points = p
            .atoms()
            .iter()
            .map(|x| x.iter().chain(x).copied().collect())
            .collect();
        Self::new(DiscreteMeasure::from_parts_unchecked(
            2 * p.dim(),
            points,
            p.weights().to_vec(),
            1.0,
        ))
        .expect("even dimension")
    }

    pub fn base(&self) -> &DiscreteMeasure {
        &self.base
    }

    pub fn left(&self) -> &DiscreteMeasure {
        &self.left
    }

    pub fn right(&self) -> &DiscreteMeasure {
        &self.right
    }

    /// Dimension K of each side.
    pub fn dim(&self) -> usize {
        self.left.dim()
    }
}

/// Two laws on ℝᴷ with identical uniform marginals, for randomized checks.
///
/// Each axis gets `n` distinct integer values drawn from `0..=4n`; each
/// measure puts mass 1/n on the atoms formed by pairing the first axis with
/// an independent random permutation of every other axis. Deterministic in
/// `seed`.
pub fn random_common_marginal_pair(
    seed: u64,
    k: usize,
    n: usize,
) -> (DiscreteMeasure, DiscreteMeasure) {
    random_common_marginal_pair_scaled(seed, k, n, 1.0)
}

/// [`random_common_marginal_pair`] with every coordinate multiplied by
/// `scale`. The dependence structure does not change with the scale, but
/// distances between atoms do.
pub fn random_common_marginal_pair_scaled(
    seed: u64,
    k: usize,
    n: usize,
    scale: f64,
) -> (DiscreteMeasure, DiscreteMeasure) {
    assert!(k >= 1 && n >= 1, "need k >= 1 and n >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<u32> = (0..=(4 * n as u32)).collect();
    let values: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let mut v: Vec<f64> = pool
                .choose_multiple(&mut rng, n)
                .map(|&x| x as f64 * scale)
                .collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let build = |rng: &mut ChaCha8Rng| {
        let perms: Vec<Vec<usize>> = (1..k)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        let points: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                std::iter::once(values[0][i])
                    .chain(perms.iter().enumerate().map(|(j, p)| values[j + 1][p[i]]))
                    .collect()
            })
            .collect();
        DiscreteMeasure::uniform(points).expect("valid uniform measure")
    };
    let p = build(&mut rng);
    let q = build(&mut rng);
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_co() -> DiscreteMeasure {
        DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap()
    }

    fn p_ind() -> DiscreteMeasure {
        DiscreteMeasure::uniform(vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn construction_merges_duplicates() {
        let m = DiscreteMeasure::new(vec![vec![0.0], vec![0.0]], vec![0.4, 0.6]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.weights(), &[1.0]);
        assert_eq!(p_co().len(), 2);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.6]),
            Err(Error::WeightSum(_))
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![-0.1, 1.1]),
            Err(Error::NegativeWeight { index: 0, .. })
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
    }

    #[test]
    fn marginals_and_products() {
        let bern = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(p_co().marginal(0).unwrap().approx_eq(&bern, 0.0));
        assert!(p_ind().marginal(1).unwrap().approx_eq(&bern, 0.0));
        assert!(bern.marginal(0).unwrap().approx_eq(&bern, 0.0));
        assert!(p_co().marginal(2).is_err());

        assert!(product_of_marginals(&p_co()).approx_eq(&p_ind(), 1e-15));
        assert!(product_of_marginals(&p_ind()).approx_eq(&p_ind(), 1e-15));
        assert!(product_of_marginals(&bern).approx_eq(&bern, 0.0));
    }

    #[test]
    fn common_marginals() {
        assert!(common_marginals_check(&p_co(), &p_ind(), 1e-12).unwrap());
        assert!(common_marginals_check(&p_co(), &p_co(), 0.0).unwrap());
        let shifted = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![2.0, 2.0]]).unwrap();
        assert!(!common_marginals_check(&p_co(), &shifted, 1e-9).unwrap());
    }

    #[test]
    fn survival_values() {
        assert_eq!(p_co().survival(&[0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(p_ind().survival(&[0.5, 0.5]).unwrap(), 0.25);
        assert_eq!(p_ind().survival(&[-3.0, -3.0]).unwrap(), 1.0);
        assert!(p_ind().survival(&[0.0]).is_err());
        assert_eq!(p_co().strict_survival(&[0.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn survival_sup_examples() {
        assert_eq!(survival_sup_distance(&p_co(), &p_ind()).unwrap(), 0.25);
        assert_eq!(survival_sup_distance_grid(&p_co(), &p_ind()).unwrap(), 0.25);
        assert_eq!(survival_sup_distance(&p_co(), &p_co()).unwrap(), 0.0);
        let a = DiscreteMeasure::new(vec![vec![0.0], vec![3.0]], vec![0.3, 0.7]).unwrap();
        assert_eq!(survival_sup_distance(&a, &a.clone()).unwrap(), 0.0);
    }

    #[test]
    fn coupling_projections() {
        let c = Coupling::independent(&p_co(), &p_ind()).unwrap();
        assert!(c.left().approx_eq(&p_co(), 1e-15));
        assert!(c.right().approx_eq(&p_ind(), 1e-15));
        assert!(Coupling::with_marginals(c.base().clone(), &p_co(), &p_ind()).is_ok());
        assert!(Coupling::with_marginals(c.base().clone(), &p_ind(), &p_ind()).is_err());
        let d = Coupling::diagonal(&p_co());
        assert!(d.left().approx_eq(d.right(), 0.0));
    }

    #[test]
    fn generator_contract() {
        let (p, q) = random_common_marginal_pair(7, 2, 1);
        assert_eq!(p, q);
        assert_eq!(p.len(), 1);
        let (a, b) = random_common_marginal_pair(11, 2, 4);
        let (c, d) = random_common_marginal_pair(11, 2, 4);
        assert_eq!((a.clone(), b.clone()), (c, d));
        assert_eq!(a.len(), 4);
        assert!(common_marginals_check(&a, &b, 1e-12).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_measure(dim: usize) -> impl Strategy<Value = DiscreteMeasure> {
            prop::collection::vec(
                (prop::collection::vec(0i32..4, dim), 1u32..10),
                1..7,
            )
            .prop_map(move |rows| {
                let total: u32 = rows.iter().map(|r| r.1).sum();
                let points = rows
                    .iter()
                    .map(|r| r.0.iter().map(|&x| x as f64).collect())
                    .collect();
                let weights = rows.iter().map(|r| r.1 as f64 / total as f64).collect();
                DiscreteMeasure::new(points, weights).unwrap()
            })
        }

        proptest! {
            #[test]
            fn sweep_matches_grid(p in small_measure(3), q in small_measure(3)) {
                let fast = survival_sup_distance(&p, &q).unwrap();
                let slow = survival_sup_distance_grid(&p, &q).unwrap();
                prop_assert!((fast - slow).abs() <= 1e-12);
            }

            #[test]
            fn sweep_matches_grid_2d(p in small_measure(2), q in small_measure(2)) {
                let fast = survival_sup_distance(&p, &q).unwrap();
                let slow = survival_sup_distance_grid(&p, &q).unwrap();
                prop_assert!((fast - slow).abs() <= 1e-12);
            }

            #[test]
            fn survival_is_nonincreasing(p in small_measure(2), u in prop::collection::vec(-1.0f64..4.0, 2), d in prop::collection::vec(0.0f64..2.0, 2)) {
                let v: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + b).collect();
                prop_assert!(p.survival(&u).unwrap() >= p.survival(&v).unwrap());
            }

            #[test]
            fn survival_sup_is_pseudometric(p in small_measure(2), q in small_measure(2), r in small_measure(2)) {
                let pq = survival_sup_distance(&p, &q).unwrap();
                let qp = survival_sup_distance(&q, &p).unwrap();
                let pr = survival_sup_distance(&p, &r).unwrap();
                let rq = survival_sup_distance(&r, &q).unwrap();
                prop_assert!((pq - qp).abs() <= 1e-12);
                prop_assert!(pq <= pr + rq + 1e-12);
                prop_assert_eq!(survival_sup_distance(&p, &p).unwrap(), 0.0);
            }

            #[test]
            fn product_keeps_marginals(p in small_measure(3)) {
                let prod = product_of_marginals(&p);
                prop_assert!(common_marginals_check(&p, &prod, 1e-12).unwrap());
            }

            #[test]
            fn one_dimensional_common_marginals_are_equal_laws(seed in any::<u64>(), n in 1usize..7) {
                let (p, q) = random_common_marginal_pair(seed, 1, n);
                prop_assert_eq!(survival_sup_distance(&p, &q).unwrap(), 0.0);
            }
        }
    }
}
