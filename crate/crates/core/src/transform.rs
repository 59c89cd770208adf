//! Distributional transform and copulas of discrete laws.
//!
//! The randomized transform sends an atom `x` to the point
//! `(F₁(x₁⁻) + V₁ P₁{x₁}, …, F_K(x_K⁻) + V_K P_K{x_K})` with independent
//! uniform `V_k`. Conditionally on the atom that point is uniform on the box
//! `∏ [F_k(x_k⁻), F_k(x_k)]`, so the copula of a discrete law is an exact
//! finite mixture of uniform boxes. [`RectMixture`] stores that mixture and
//! evaluates the copula and its survival function in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{for_each_grid_point, DiscreteMeasure, WEIGHT_TOL};

/// Tolerance used when matching box endpoints to a marginal CDF grid.
pub const GRID_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectComponent {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub weight: f64,
}

impl RectComponent {
    /// Mass fraction of this box inside `{U_k ≤ t}`.
    fn below(&self, k: usize, t: f64) -> f64 {
        let (l, u) = (self.lower[k], self.upper[k]);
        ((t.min(u) - l).max(0.0)) / (u - l)
    }

    /// Mass fraction of this box inside `{U_k ≥ t}`.
    fn above(&self, k: usize, t: f64) -> f64 {
        let (l, u) = (self.lower[k], self.upper[k]);
        ((u - t.max(l)).max(0.0)) / (u - l)
    }
}

/// Finite mixture of uniform laws on axis-aligned boxes in [0,1]ᴷ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectMixture {
    dim: usize,
    components: Vec<RectComponent>,
}

impl RectMixture {
    pub fn new(dim: usize, components: Vec<RectComponent>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("dimension"));
        }
        if components.is_empty() {
            return Err(Error::Empty("components"));
        }
        let mut total = 0.0;
        for (i, c) in components.iter().enumerate() {
            if c.lower.len() != dim || c.upper.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.lower.len().max(c.upper.len()),
                });
            }
            let ok = c
                .lower
                .iter()
                .zip(&c.upper)
                .all(|(&l, &u)| 0.0 <= l && l < u && u <= 1.0);
            if !ok {
                return Err(Error::OutOfRange(format!(
                    "component {i} needs 0 <= lower < upper <= 1 on every axis"
                )));
            }
            if !(c.weight >= 0.0) {
                return Err(Error::NegativeWeight {
                    index: i,
                    weight: c.weight,
                });
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::WeightSum(total));
        }
        Ok(Self { dim, components })
    }

    /// The independence copula, a single box covering the cube.
    pub fn independence(dim: usize) -> Self {
        Self {
            dim,
            components: vec![RectComponent {
                lower: vec![0.0; dim],
                upper: vec![1.0; dim],
                weight: 1.0,
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[RectComponent] {
        &self.components
    }

    /// Pr(U_k ≤ t); equals `t` for a genuine copula.
    pub fn marginal_cdf(&self, k: usize, t: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.below(k, t)).sum()
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        if u.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::OutOfRange(format!("{u:?} is outside the unit cube")));
        }
        Ok(())
    }
}

/// Jump structure of a 1-D law: sorted support with F(x⁻) and F(x).
#[derive(Debug, Clone)]
pub(crate) struct CdfSteps {
    pub values: Vec<f64>,
    pub before: Vec<f64>,
    pub at: Vec<f64>,
}

impl CdfSteps {
    pub fn new(p1: &DiscreteMeasure) -> Self {
        let values: Vec<f64> = p1.values_1d().collect();
        let mut before = Vec::with_capacity(values.len());
        let mut at = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for &w in p1.weights() {
            before.push(acc);
            acc += w;
            at.push(acc);
        }
        // the top of the last jump is exactly 1 so boxes stay inside the cube
        if let Some(last) = at.last_mut() {
            *last = 1.0;
        }
        Self { values, before, at }
    }

    /// (Pr(X < x), Pr(X = x)).
    fn split(&self, x: f64) -> (f64, f64) {
        let i = self.values.partition_point(|v| *v < x);
        let below = if i == 0 { 0.0 } else { self.at[i - 1] };
        match self.values.get(i) {
            Some(&v) if v == x => (below, self.at[i] - self.before[i]),
            _ => (below, 0.0),
        }
    }
}

fn require_1d(p1: &DiscreteMeasure) -> Result<()> {
    if p1.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: p1.dim(),
        });
    }
    Ok(())
}

/// F̃(x, v) = Pr(X < x) + v · Pr(X = x).
pub fn dtransform(p1: &DiscreteMeasure, x: f64, v: f64) -> Result<f64> {
    require_1d(p1)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange(format!("v = {v} is not in [0, 1]")));
    }
    let (below, jump) = CdfSteps::new(p1).split(x);
    Ok(below + v * jump)
}

/// inf{x : Pr(X ≤ x) ≥ u} for u ∈ (0, 1].
pub fn pseudo_inverse(p1: &DiscreteMeasure, u: f64) -> Result<f64> {
    require_1d(p1)?;
    pseudo_inverse_steps(&CdfSteps::new(p1), u)
}

fn pseudo_inverse_steps(steps: &CdfSteps, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::OutOfRange(format!("u = {u} is not in (0, 1]")));
    }
    let i = steps.at.partition_point(|f| *f < u);
    Ok(steps.values[i.min(steps.values.len() - 1)])
}

/// Exact law of the randomized distributional transform of `p`.
pub fn to_copula(p: &DiscreteMeasure) -> RectMixture {
    let steps: Vec<CdfSteps> = p.marginals().iter().map(CdfSteps::new).collect();
    let components = p
        .iter()
        .map(|(x, w)| {
            let (lower, upper) = x
                .iter()
                .zip(&steps)
                .map(|(&xk, s)| {
                    let i = s.values.partition_point(|v| *v < xk);
                    (s.before[i], s.at[i])
                })
                .unzip();
            RectComponent {
                lower,
                upper,
                weight: w,
            }
        })
        .collect();
    RectMixture {
        dim: p.dim(),
        components,
    }
}

/// C(u) = Pr(U ≤ u).
pub fn copula_cdf(c: &RectMixture, u: &[f64]) -> Result<f64> {
    c.check_point(u)?;
    Ok(c.components
        .iter()
        .map(|r| r.weight * u.iter().enumerate().map(|(k, &t)| r.below(k, t)).product::<f64>())
        .sum())
}

/// C̄(u) = Pr(U ≥ u).
pub fn survival_copula(c: &RectMixture, u: &[f64]) -> Result<f64> {
    c.check_point(u)?;
    Ok(survival_unchecked(c, u))
}

fn survival_unchecked(c: &RectMixture, u: &[f64]) -> f64 {
    c.components
        .iter()
        .map(|r| r.weight * u.iter().enumerate().map(|(k, &t)| r.above(k, t)).product::<f64>())
        .sum()
}

/// Per-axis union of box endpoints of both mixtures, plus 0 and 1.
fn endpoint_grid(a: &RectMixture, b: &RectMixture) -> Vec<Vec<f64>> {
    (0..a.dim)
        .map(|k| {
            let mut v: Vec<f64> = [0.0, 1.0]
                .into_iter()
                .chain(
                    a.components
                        .iter()
                        .chain(&b.components)
                        .flat_map(|r| [r.lower[k], r.upper[k]]),
                )
                .collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect()
}

/// sup over u ∈ [0,1]ᴷ of |C̄(u) − C̄′(u)|.
///
/// Within each cell of the endpoint grid every box contributes a product of
/// functions that are affine in each coordinate, so the difference is
/// multi-affine on the cell and its extremes sit at cell vertices. Evaluating
/// on the grid is therefore exact.
pub fn copula_sup_distance(a: &RectMixture, b: &RectMixture) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let grid = endpoint_grid(a, b);
    let mut best = 0.0f64;
    for_each_grid_point(&grid, |u| {
        best = best.max((survival_unchecked(a, u) - survival_unchecked(b, u)).abs());
    });
    Ok(best)
}

/// Coordinatewise pseudo-inverse (P₁⁻¹(u₁), …, P_K⁻¹(u_K)).
pub fn quantile_map(u: &[f64], marginals: &[DiscreteMeasure]) -> Result<Vec<f64>> {
    if u.len() != marginals.len() {
        return Err(Error::DimensionMismatch {
            expected: marginals.len(),
            got: u.len(),
        });
    }
    u.iter()
        .zip(marginals)
        .map(|(&uk, m)| pseudo_inverse(m, uk))
        .collect()
}

fn grid_index(points: &[f64], t: f64) -> Option<usize> {
    let i = points.partition_point(|p| *p < t - GRID_TOL);
    (i < points.len() && (points[i] - t).abs() <= GRID_TOL).then_some(i)
}

/// Pushes a copula back to ℝᴷ through the coordinatewise pseudo-inverse.
///
/// Every box endpoint must lie on the CDF grid of the corresponding
/// marginal; a box edge spanning several jumps splits its mass in proportion
/// to the jump sizes, which is the exact image of the uniform law on it.
pub fn push_back(c: &RectMixture, marginals: &[DiscreteMeasure]) -> Result<DiscreteMeasure> {
    if marginals.len() != c.dim {
        return Err(Error::DimensionMismatch {
            expected: c.dim,
            got: marginals.len(),
        });
    }
    let steps = marginals
        .iter()
        .map(|m| {
            require_1d(m)?;
            Ok(CdfSteps::new(m))
        })
        .collect::<Result<Vec<_>>>()?;
    // cdf grid per axis: 0 followed by F at each support point
    let grids: Vec<Vec<f64>> = steps
        .iter()
        .map(|s| std::iter::once(0.0).chain(s.at.iter().copied()).collect())
        .collect();

    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (ci, r) in c.components.iter().enumerate() {
        // per axis: (value, fraction of the edge)
        let mut axes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(c.dim);
        for k in 0..c.dim {
            let lo = grid_index(&grids[k], r.lower[k]);
            let hi = grid_index(&grids[k], r.upper[k]);
            let (Some(lo), Some(hi)) = (lo, hi) else {
                return Err(Error::GridMismatch(format!(
                    "component {ci}, axis {k}: [{}, {}]",
                    r.lower[k], r.upper[k]
                )));
            };
            let width = r.upper[k] - r.lower[k];
            axes.push(
                (lo..hi)
                    .map(|i| (steps[k].values[i], (steps[k].at[i] - steps[k].before[i]) / width))
                    .collect(),
            );
        }
        let mut partial: Vec<(Vec<f64>, f64)> = vec![(Vec::with_capacity(c.dim), r.weight)];
        for axis in &axes {
            partial = partial
                .iter()
                .flat_map(|(p, w)| {
                    axis.iter().map(move |&(x, f)| {
                        let mut q = p.clone();
                        q.push(x);
                        (q, w * f)
                    })
                })
                .collect();
        }
        for (p, w) in partial {
            points.push(p);
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSum(total));
    }
    Ok(DiscreteMeasure::from_parts_unchecked(c.dim, points, weights, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern() -> DiscreteMeasure {
        DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap()
    }

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
    fn dtransform_examples() {
        assert_eq!(dtransform(&bern(), 0.0, 0.5).unwrap(), 0.25);
        assert_eq!(dtransform(&bern(), -4.0, 0.9).unwrap(), 0.0);
        assert_eq!(dtransform(&bern(), 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(dtransform(&bern(), 0.5, 0.3).unwrap(), 0.5);
        assert!(dtransform(&bern(), 0.0, 1.5).is_err());
    }

    #[test]
    fn pseudo_inverse_examples() {
        assert_eq!(pseudo_inverse(&bern(), 0.3).unwrap(), 0.0);
        assert_eq!(pseudo_inverse(&bern(), 0.5).unwrap(), 0.0);
        assert_eq!(pseudo_inverse(&bern(), 0.7).unwrap(), 1.0);
        assert_eq!(pseudo_inverse(&bern(), 1.0).unwrap(), 1.0);
        assert!(pseudo_inverse(&bern(), 0.0).is_err());
        assert!(pseudo_inverse(&bern(), 1.2).is_err());
    }

    #[test]
    fn copula_of_comonotone_bernoulli() {
        let c = to_copula(&p_co());
        assert_eq!(c.components().len(), 2);
        assert_eq!(c.components()[0].lower, vec![0.0, 0.0]);
        assert_eq!(c.components()[0].upper, vec![0.5, 0.5]);
        assert_eq!(c.components()[1].lower, vec![0.5, 0.5]);
        assert_eq!(c.components()[1].upper, vec![1.0, 1.0]);
        assert_eq!(copula_cdf(&c, &[0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(survival_copula(&c, &[0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(copula_cdf(&c, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(copula_cdf(&c, &[0.0, 0.7]).unwrap(), 0.0);
        assert_eq!(survival_copula(&c, &[0.0, 0.0]).unwrap(), 1.0);
        assert!(copula_cdf(&c, &[1.1, 0.2]).is_err());
    }

    #[test]
    fn copula_of_bernoulli_is_uniform() {
        let c = to_copula(&bern());
        assert_eq!(c.components().len(), 2);
        for t in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((copula_cdf(&c, &[t]).unwrap() - t).abs() < 1e-15);
        }
    }

    #[test]
    fn independence_copula_from_product() {
        let c = to_copula(&p_ind());
        assert_eq!(c.components().len(), 4);
        assert!(c.components().iter().all(|r| r.weight == 0.25));
        assert_eq!(survival_copula(&c, &[0.5, 0.5]).unwrap(), 0.25);
        let ind = RectMixture::independence(2);
        assert_eq!(survival_copula(&ind, &[0.5, 0.5]).unwrap(), 0.25);
    }

    #[test]
    fn sup_distance_examples() {
        let a = to_copula(&p_co());
        let b = to_copula(&p_ind());
        assert_eq!(copula_sup_distance(&a, &b).unwrap(), 0.25);
        assert_eq!(copula_sup_distance(&a, &a).unwrap(), 0.0);
        let one = DiscreteMeasure::new(vec![vec![0.0], vec![2.0], vec![5.0]], vec![0.2, 0.3, 0.5])
            .unwrap();
        assert_eq!(copula_sup_distance(&to_copula(&bern()), &to_copula(&one)).unwrap(), 0.0);
    }

    #[test]
    fn quantile_map_examples() {
        let m = vec![bern(), bern()];
        assert_eq!(quantile_map(&[0.3, 0.7], &m).unwrap(), vec![0.0, 1.0]);
        let c = DiscreteMeasure::point_mass(vec![2.5]).unwrap();
        assert_eq!(quantile_map(&[0.1, 0.9], &[c.clone(), c]).unwrap(), vec![2.5, 2.5]);
        let wide = DiscreteMeasure::uniform(vec![vec![-1.0], vec![4.0], vec![9.0]]).unwrap();
        assert_eq!(quantile_map(&[1.0, 1.0], &[wide, bern()]).unwrap(), vec![9.0, 1.0]);
        assert!(quantile_map(&[0.0, 0.5], &m).is_err());
    }

    #[test]
    fn push_back_examples() {
        let m = p_co().marginals();
        assert!(push_back(&to_copula(&p_co()), &m).unwrap().approx_eq(&p_co(), 1e-12));
        assert!(push_back(&RectMixture::independence(2), &[bern(), bern()])
            .unwrap()
            .approx_eq(&p_ind(), 1e-12));
        assert!(push_back(&to_copula(&p_ind()), &p_ind().marginals())
            .unwrap()
            .approx_eq(&p_ind(), 1e-12));
        let skew = DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.3, 0.7]).unwrap();
        assert!(matches!(
            push_back(&to_copula(&p_co()), &[skew, bern()]),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn rect_mixture_validation() {
        let bad = RectComponent {
            lower: vec![0.5],
            upper: vec![0.5],
            weight: 1.0,
        };
        assert!(RectMixture::new(1, vec![bad]).is_err());
        let json = serde_json::to_string(&to_copula(&p_co())).unwrap();
        assert!(json.starts_with("{\"dim\":2,\"components\":[{\"lower\""));
        let back: RectMixture = serde_json::from_str(&json).unwrap();
        assert_eq!(back, to_copula(&p_co()));
    }
}
