//! Integral probability metrics between discrete laws.
//!
//! * [`m1_distance`]: the metric generated by coordinatewise nondecreasing
//!   functions into [0, 1]. Under common marginals it reduces to the largest
//!   gap between the two survival functions.
//! * [`bl1_distance`]: the bounded-Lipschitz (Dudley) metric, solved exactly
//!   as a linear program over function values on the joint support.
//! * [`bl1_coupling_bound`]: the coupling upper bound E r_p(X, X′).
//! * [`theorem2_bound`]: the square-root bridge from the bounded-Lipschitz
//!   distance to the monotone-class distance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::MonotoneStep;
use crate::lp::{self, LinearProgram, LpStatus};
use crate::measure::{
    common_marginals_check, lex_cmp, signed_difference, survival_sup_distance, Coupling,
    DiscreteMeasure,
};

/// Tolerance on marginal agreement required by [`m1_distance`].
pub const MARGINAL_TOL: f64 = 1e-9;
/// Tolerance used when checking a bounded-Lipschitz witness.
pub const WITNESS_TOL: f64 = 1e-9;

/// Ground distance r_p(x, y) = (Σ |x_k − y_k|^p)^{1/p}, max-coordinate at p = ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpMetric {
    p: f64,
}

impl LpMetric {
    pub const L1: LpMetric = LpMetric { p: 1.0 };
    pub const L2: LpMetric = LpMetric { p: 2.0 };
    pub const LINF: LpMetric = LpMetric { p: f64::INFINITY };

    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::OutOfRange(format!("p = {p} must be at least 1")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        if self.p.is_infinite() {
            diffs.fold(0.0, f64::max)
        } else if self.p == 1.0 {
            diffs.sum()
        } else if self.p == 2.0 {
            diffs.map(|d| d * d).sum::<f64>().sqrt()
        } else {
            diffs.map(|d| d.powf(self.p)).sum::<f64>().powf(1.0 / self.p)
        }
    }

    /// (p − 1) / (2p), read as ½ at p = ∞.
    pub fn bridge_exponent(&self) -> f64 {
        if self.p.is_infinite() {
            0.5
        } else {
            (self.p - 1.0) / (2.0 * self.p)
        }
    }
}

impl std::str::FromStr for LpMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(Self::LINF),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad metric exponent {s:?}")))?;
                Self::new(p)
            }
        }
    }
}

/// Monotone-class distance for laws with common marginals.
///
/// With common marginals the monotone-class metric on ℝᴷ equals the same
/// metric between the two copulas, which in turn equals the sup-distance of
/// the survival copulas; that sup is attained on the marginal CDF grid,
/// whose vertices correspond to orthants `[u, ∞)` in the original scale.
/// Fails with [`Error::MarginalsDiffer`] otherwise; use
/// [`survival_sup_distance`] directly for a lower bound in that case.
///
/// In one dimension a common marginal is the whole law and every copula is
/// uniform, so the distance is exactly zero; the survival sweep would only
/// add rounding noise from weights that agree within the tolerance.
pub fn m1_distance(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    if !common_marginals_check(p, q, MARGINAL_TOL)? {
        return Err(Error::MarginalsDiffer { tol: MARGINAL_TOL });
    }
    if p.dim() == 1 {
        return Ok(0.0);
    }
    survival_sup_distance(p, q)
}

/// Optimal bounded-Lipschitz test function together with its norm split.
#[derive(Debug, Clone, Serialize)]
pub struct BlReport {
    pub value: f64,
    /// Union support of the two laws, in lexicographic order.
    pub support: Vec<Vec<f64>>,
    /// f at each support point.
    pub witness_values: Vec<f64>,
    /// sup-norm budget c₀.
    pub sup_part: f64,
    /// Lipschitz budget c₁.
    pub lip_part: f64,
}

impl BlReport {
    /// Rechecks the witness against the laws, independently of the solver:
    /// norm budgets, pointwise bounds, all pairwise Lipschitz constraints and
    /// the attained value. Returns the first violation found.
    pub fn verify(
        &self,
        p: &DiscreteMeasure,
        q: &DiscreteMeasure,
        metric: LpMetric,
    ) -> std::result::Result<(), String> {
        let tol = WITNESS_TOL;
        if self.sup_part < -tol || self.lip_part < -tol {
            return Err("negative norm budget".into());
        }
        if self.sup_part + self.lip_part > 1.0 + tol {
            return Err(format!(
                "c0 + c1 = {} exceeds 1",
                self.sup_part + self.lip_part
            ));
        }
        let f = &self.witness_values;
        for (i, fi) in f.iter().enumerate() {
            if fi.abs() > self.sup_part + tol {
                return Err(format!("|f| = {} exceeds c0 at point {i}", fi.abs()));
            }
            for j in 0..i {
                let r = metric.distance(&self.support[i], &self.support[j]);
                if (fi - f[j]).abs() > self.lip_part * r + tol {
                    return Err(format!("Lipschitz bound fails between points {j} and {i}"));
                }
            }
        }
        let integral: f64 = self
            .support
            .iter()
            .zip(f)
            .map(|(x, fx)| fx * (p.mass_at(x) - q.mass_at(x)))
            .sum();
        if (integral.abs() - self.value).abs() > tol {
            return Err(format!(
                "witness integrates to {integral}, reported value {}",
                self.value
            ));
        }
        Ok(())
    }
}

/// The linear program behind [`bl1_distance`], on the given points with the
/// given signed masses. Variables are `f_1..f_m, c₀, c₁`.
pub fn bl1_program(points: &[&[f64]], net: &[f64], metric: LpMetric) -> LinearProgram {
    let m = points.len();
    let nv = m + 2;
    let (c0, c1) = (m, m + 1);
    let mut objective = net.to_vec();
    objective.extend([0.0, 0.0]);
    let mut lp = LinearProgram::new(objective)
        .bounds(c0, Some(0.0), None)
        .bounds(c1, Some(0.0), None);
    for i in 0..m {
        for sign in [1.0, -1.0] {
            let mut a = vec![0.0; nv];
            a[i] = sign;
            a[c0] = -1.0;
            lp.push_constraint(a, 0.0);
        }
    }
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let mut a = vec![0.0; nv];
                a[i] = 1.0;
                a[j] = -1.0;
                a[c1] = -metric.distance(points[i], points[j]);
                lp.push_constraint(a, 0.0);
            }
        }
    }
    let mut a = vec![0.0; nv];
    a[c0] = 1.0;
    a[c1] = 1.0;
    lp.push_constraint(a, 1.0);
    lp
}

/// Bounded-Lipschitz distance, exact for discrete laws.
///
/// The supremum over ‖f‖_∞ + ‖f‖_L ≤ 1 only depends on f at the atoms: any
/// admissible assignment of values there extends to all of ℝᴷ with the same
/// norms (McShane extension, then clipping to [−c₀, c₀]). So the metric is
/// the value of a linear program in the atom values and the two norm
/// budgets. Atoms with zero net mass are left out of the program and their
/// witness value is filled in by that same extension. The absolute value in
/// the definition needs no extra care because −f is admissible whenever f
/// is.
pub fn bl1_distance(p: &DiscreteMeasure, q: &DiscreteMeasure, metric: LpMetric) -> Result<BlReport> {
    p.check_dim(q.dim())?;
    let mut support: Vec<Vec<f64>> = p.atoms().iter().chain(q.atoms()).cloned().collect();
    support.sort_by(|a, b| lex_cmp(a, b));
    support.dedup_by(|a, b| lex_cmp(a, b).is_eq());

    let diff = signed_difference(p, q);
    if diff.is_empty() {
        return Ok(BlReport {
            value: 0.0,
            witness_values: vec![0.0; support.len()],
            support,
            sup_part: 0.0,
            lip_part: 0.0,
        });
    }
    let points: Vec<&[f64]> = diff.iter().map(|(x, _)| *x).collect();
    let net: Vec<f64> = diff.iter().map(|(_, w)| *w).collect();
    let program = bl1_program(&points, &net, metric);
    let sol = lp::solve(&program)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::LpFailure(sol.status));
    }
    let m = points.len();
    let c0 = sol.x[m].max(0.0);
    let c1 = sol.x[m + 1].max(0.0);
    let fs = &sol.x[..m];

    let witness_values = support
        .iter()
        .map(|x| match points.iter().position(|pt| lex_cmp(pt, x).is_eq()) {
            Some(i) => fs[i],
            None => {
                let ext = points
                    .iter()
                    .zip(fs)
                    .map(|(pt, f)| f + c1 * metric.distance(pt, x))
                    .fold(f64::INFINITY, f64::min);
                ext.clamp(-c0, c0)
            }
        })
        .collect();
    let value = fs.iter().zip(&net).map(|(f, w)| f * w).sum::<f64>().max(0.0);
    Ok(BlReport {
        value,
        support,
        witness_values,
        sup_part: c0,
        lip_part: c1,
    })
}

/// E r_p(X, X′) under the coupling; bounds the bounded-Lipschitz distance
/// between its two sides from above.
pub fn bl1_coupling_bound(c: &Coupling, metric: LpMetric) -> f64 {
    let k = c.dim();
    c.base()
        .iter()
        .map(|(z, w)| w * metric.distance(&z[..k], &z[k..]))
        .sum()
}

/// min{ 2^{3/2} K^{(p−1)/(2p)} √d_bl, 1 }.
pub fn theorem2_bound(d_bl: f64, k: usize, metric: LpMetric) -> f64 {
    assert!(d_bl >= 0.0, "d_bl must be nonnegative");
    let c = 2f64.powf(1.5) * (k as f64).powf(metric.bridge_exponent());
    (c * d_bl.sqrt()).min(1.0)
}

/// A coordinatewise nondecreasing test function with values in [0, 1].
#[derive(Debug, Clone)]
pub enum MonotoneTest {
    /// Indicator of the closed orthant [u, ∞).
    Orthant(Vec<f64>),
    /// x ↦ ∏_k g_k(x_k).
    Product(Vec<MonotoneStep>),
}

impl MonotoneTest {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            MonotoneTest::Orthant(u) => {
                if x.iter().zip(u).all(|(a, b)| a >= b) {
                    1.0
                } else {
                    0.0
                }
            }
            MonotoneTest::Product(gs) => gs.iter().zip(x).map(|(g, &xk)| g.eval(xk)).product(),
        }
    }

    fn arity(&self) -> usize {
        match self {
            MonotoneTest::Orthant(u) => u.len(),
            MonotoneTest::Product(gs) => gs.len(),
        }
    }
}

/// max over the supplied functions of |∫ f d(P − Q)|, a lower bound on the
/// monotone-class distance. Each function is checked for range and
/// coordinatewise monotonicity on the union support.
pub fn monotone_lb(p: &DiscreteMeasure, q: &DiscreteMeasure, fs: &[MonotoneTest]) -> Result<f64> {
    p.check_dim(q.dim())?;
    let support: Vec<&[f64]> = p.atoms().iter().chain(q.atoms()).map(Vec::as_slice).collect();
    let mut best = 0.0f64;
    for (t, f) in fs.iter().enumerate() {
        p.check_dim(f.arity())?;
        let vals: Vec<f64> = support.iter().map(|x| f.eval(x)).collect();
        if let Some(v) = vals.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::NotMonotone(format!("function {t} takes value {v}")));
        }
        for i in 0..support.len() {
            for j in 0..support.len() {
                let below = support[i].iter().zip(support[j]).all(|(a, b)| a <= b);
                if below && vals[i] > vals[j] {
                    return Err(Error::NotMonotone(format!(
                        "function {t} decreases between {:?} and {:?}",
                        support[i], support[j]
                    )));
                }
            }
        }
        let gap: f64 = p.iter().map(|(x, w)| w * f.eval(x)).sum::<f64>()
            - q.iter().map(|(x, w)| w * f.eval(x)).sum::<f64>();
        best = best.max(gap.abs());
    }
    Ok(best)
}
