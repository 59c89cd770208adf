//! Moment bounds built on the monotone-class distance: quantile functions of
//! transformed variables, the product-quantile bound for laws with common
//! marginals, the strong mixing coefficient of a pair and two covariance
//! bounds (Rio's, and its bounded-Lipschitz version).
//!
//! Test functions are nonnegative, nondecreasing, right-continuous step
//! functions ([`MonotoneStep`]); every integral here is evaluated exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{product_of_marginals, DiscreteMeasure};
use crate::metrics::{bl1_distance, m1_distance, LpMetric};

/// A nondecreasing right-continuous step function on ℝ, or the identity.
///
/// With breakpoints `t₁ < … < t_m` and values `v₀ ≤ … ≤ v_m`, the function is
/// `v₀` left of `t₁` and `v_i` on `[t_i, t_{i+1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    identity: bool,
}

impl MonotoneStep {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidStep(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("step function"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStep("breakpoints must increase strictly".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidStep("values must be nondecreasing".into()));
        }
        Ok(Self {
            breakpoints,
            values,
            identity: false,
        })
    }

    pub fn identity() -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
            identity: true,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            values: vec![c],
            identity: false,
        }
    }

    /// `low` below `t`, `high` from `t` on.
    pub fn threshold(t: f64, low: f64, high: f64) -> Result<Self> {
        Self::new(vec![t], vec![low, high])
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.identity {
            return x;
        }
        self.values[self.breakpoints.partition_point(|t| *t <= x)]
    }

    /// Smallest value taken on the support of `p1`.
    fn min_on(&self, p1: &DiscreteMeasure) -> f64 {
        p1.values_1d().map(|x| self.eval(x)).fold(f64::INFINITY, f64::min)
    }
}

fn require_dim(p: &DiscreteMeasure, dim: usize) -> Result<()> {
    if p.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.dim(),
        });
    }
    Ok(())
}

fn require_nonnegative(g: &MonotoneStep, p1: &DiscreteMeasure) -> Result<()> {
    let m = g.min_on(p1);
    if m < 0.0 {
        return Err(Error::InvalidStep(format!(
            "function takes negative value {m} on the support"
        )));
    }
    Ok(())
}

/// Law of g(X).
pub fn apply_monotone(g: &MonotoneStep, p1: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    require_dim(p1, 1)?;
    let points = p1.values_1d().map(|x| vec![g.eval(x)]).collect();
    Ok(DiscreteMeasure::from_parts_unchecked(
        1,
        points,
        p1.weights().to_vec(),
        1.0,
    ))
}

/// Nonincreasing step function on [0, 1): `values[i]` on
/// `[breakpoints[i], breakpoints[i+1])`, with `breakpoints[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepQuantile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepQuantile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidStep("need one value per breakpoint".into()));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() >= 1.0 {
            return Err(Error::InvalidStep("breakpoints must start at 0 and stay below 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStep("breakpoints must increase strictly".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) || values.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidStep("values must be nonincreasing and nonnegative".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `s`; zero for `s ≥ 1`, where the defining infimum is taken
    /// over nonnegative levels.
    pub fn eval(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|b| *b <= s);
        self.values[i.saturating_sub(1)]
    }
}

/// Q(s) = inf{x : Pr(g(X) > x) ≤ s} for s ∈ [0, 1).
///
/// If g(X) takes values `y₁ < … < y_r`, then Q equals `y_j` on
/// `[Pr(g(X) > y_j), Pr(g(X) > y_{j−1}))`.
pub fn quantile_g(p1: &DiscreteMeasure, g: &MonotoneStep) -> Result<StepQuantile> {
    require_dim(p1, 1)?;
    require_nonnegative(g, p1)?;
    let law = apply_monotone(g, p1)?;
    let ys: Vec<f64> = law.values_1d().collect();
    let ws = law.weights();
    // tail[j] = Pr(g(X) > y_j)
    let mut tail = vec![0.0; ys.len()];
    let mut acc = 0.0;
    for j in (0..ys.len()).rev() {
        tail[j] = acc;
        acc += ws[j];
    }
    let mut breakpoints = Vec::with_capacity(ys.len());
    let mut values = Vec::with_capacity(ys.len());
    for j in (0..ys.len()).rev() {
        let s = tail[j];
        // rounding can leave a tail mass at 1 or out of order; skip those
        if s >= 1.0 || breakpoints.last().is_some_and(|b| s <= *b) {
            continue;
        }
        breakpoints.push(s);
        values.push(ys[j]);
    }
    StepQuantile::new(breakpoints, values)
}

/// ∫₀^θ ∏ Q_k(s) ds, exact. θ is clamped to [0, 1]; the quantile functions
/// vanish beyond 1.
pub fn step_product_integral(qs: &[StepQuantile], theta: f64) -> f64 {
    let theta = theta.clamp(0.0, 1.0);
    if theta == 0.0 {
        return 0.0;
    }
    let mut cuts: Vec<f64> = qs
        .iter()
        .flat_map(|q| q.breakpoints.iter().copied())
        .filter(|b| *b < theta)
        .chain([0.0, theta])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let h: f64 = qs.iter().map(|q| q.eval(w[0])).product();
            h * (w[1] - w[0])
        })
        .sum()
}

/// |∫ ∏ g_k(x_k) d(P − Q)(x)|.
pub fn product_moment_gap(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    gs: &[MonotoneStep],
) -> Result<f64> {
    p.check_dim(q.dim())?;
    p.check_dim(gs.len())?;
    let moment = |m: &DiscreteMeasure| -> f64 {
        m.iter()
            .map(|(x, w)| w * gs.iter().zip(x).map(|(g, &xk)| g.eval(xk)).product::<f64>())
            .sum()
    };
    Ok((moment(p) - moment(q)).abs())
}

/// 2 ∫₀^θ ∏_k Q_{g_k}(s) ds with θ = d_M₁(P, Q) / 2.
///
/// Bounds [`product_moment_gap`] for laws with common marginals. The factor
/// 2 is required: for the comonotone and independent Bernoulli(½) pairs
/// with identity functions the gap is ¼ and the integral without it is ⅛.
pub fn corollary1_bound(p: &DiscreteMeasure, q: &DiscreteMeasure, gs: &[MonotoneStep]) -> Result<f64> {
    p.check_dim(gs.len())?;
    let theta = m1_distance(p, q)? / 2.0;
    let quantiles = gs
        .iter()
        .enumerate()
        .map(|(k, g)| quantile_g(&p.marginal(k)?, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(2.0 * step_product_integral(&quantiles, theta))
}

/// Per-axis thresholds for the strict survival function: every atom value
/// and one value below all of them.
fn strict_thresholds(p1: &DiscreteMeasure) -> Vec<f64> {
    let vals: Vec<f64> = p1.values_1d().collect();
    std::iter::once(vals[0] - 1.0).chain(vals).collect()
}

/// α = 2 sup_{y,z} |Pr(Y > y, Z > z) − Pr(Y > y) Pr(Z > z)|.
///
/// Strict survival functions of discrete laws only change at atom values,
/// so thresholds at the atoms (plus one below all of them) are exhaustive.
pub fn alpha_coefficient(j: &DiscreteMeasure) -> Result<f64> {
    require_dim(j, 2)?;
    let (my, mz) = (j.marginal(0)?, j.marginal(1)?);
    let ty = strict_thresholds(&my);
    let tz = strict_thresholds(&mz);
    let sy: Vec<f64> = ty.iter().map(|&y| my.strict_survival(&[y]).unwrap()).collect();
    let sz: Vec<f64> = tz.iter().map(|&z| mz.strict_survival(&[z]).unwrap()).collect();
    let mut best = 0.0f64;
    for (a, &y) in ty.iter().enumerate() {
        for (b, &z) in tz.iter().enumerate() {
            let joint = j.strict_survival(&[y, z]).unwrap();
            best = best.max((joint - sy[a] * sz[b]).abs());
        }
    }
    Ok(2.0 * best)
}

fn pair_quantiles(
    j: &DiscreteMeasure,
    gy: &MonotoneStep,
    gz: &MonotoneStep,
) -> Result<[StepQuantile; 2]> {
    require_dim(j, 2)?;
    Ok([
        quantile_g(&j.marginal(0)?, gy)?,
        quantile_g(&j.marginal(1)?, gz)?,
    ])
}

/// Rio's bound 2 ∫₀^α Q_{g_Y}(s) Q_{g_Z}(s) ds with α the mixing
/// coefficient of (Y, Z). Transforming by nondecreasing right-continuous
/// functions cannot increase α, so the coefficient of (Y, Z) is used.
pub fn rio_bound(j: &DiscreteMeasure, gy: &MonotoneStep, gz: &MonotoneStep) -> Result<f64> {
    let qs = pair_quantiles(j, gy, gz)?;
    let alpha = alpha_coefficient(j)?;
    Ok(2.0 * step_product_integral(&qs, alpha))
}

/// θ = 2 min{ √(8 d_bl), 1 }.
pub fn corollary2_theta(d_bl: f64) -> f64 {
    2.0 * (8.0 * d_bl).sqrt().min(1.0)
}

/// 2 ∫₀^θ Q_{g_Y}(s) Q_{g_Z}(s) ds with θ from [`corollary2_theta`], where
/// `d_bl` is the bounded-Lipschitz distance (ground metric r₁) between the
/// law of (Y, Z) and the product of its marginals. θ can reach 2; the
/// integral stops at 1, past which the quantile functions vanish.
pub fn corollary2_bound(
    j: &DiscreteMeasure,
    gy: &MonotoneStep,
    gz: &MonotoneStep,
    d_bl: f64,
) -> Result<f64> {
    if !(d_bl >= 0.0) {
        return Err(Error::OutOfRange(format!("d_bl = {d_bl} must be nonnegative")));
    }
    let qs = pair_quantiles(j, gy, gz)?;
    Ok(2.0 * step_product_integral(&qs, corollary2_theta(d_bl)))
}

/// Cov(g_Y(Y), g_Z(Z)), exact over the atoms.
pub fn covariance(j: &DiscreteMeasure, gy: &MonotoneStep, gz: &MonotoneStep) -> Result<f64> {
    require_dim(j, 2)?;
    let (mut ey, mut ez, mut eyz) = (0.0, 0.0, 0.0);
    for (x, w) in j.iter() {
        let (a, b) = (gy.eval(x[0]), gz.eval(x[1]));
        ey += w * a;
        ez += w * b;
        eyz += w * a * b;
    }
    Ok(eyz - ey * ez)
}

/// Everything the covariance-bound report needs, for one pair law.
#[derive(Debug, Clone, Serialize)]
pub struct CovBounds {
    pub cov: f64,
    pub alpha: f64,
    pub rio_bound: f64,
    pub cor2_bound: f64,
    pub d_bl: f64,
    pub theta: f64,
}

/// Covariance, mixing coefficient and both bounds; `d_bl` is computed
/// against the product of the marginals with ground metric r₁.
pub fn cov_bounds(j: &DiscreteMeasure, gy: &MonotoneStep, gz: &MonotoneStep) -> Result<CovBounds> {
    require_dim(j, 2)?;
    let d_bl = bl1_distance(j, &product_of_marginals(j), LpMetric::L1)?.value;
    Ok(CovBounds {
        cov: covariance(j, gy, gz)?,
        alpha: alpha_coefficient(j)?,
        rio_bound: rio_bound(j, gy, gz)?,
        cor2_bound: corollary2_bound(j, gy, gz, d_bl)?,
        d_bl,
        theta: corollary2_theta(d_bl),
    })
}
