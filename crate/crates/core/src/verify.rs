//! Randomized checks of the inequalities and identities implemented in the
//! other modules. Trial `t` of a suite started from `seed` uses the seed
//! `seed + t`, so any failing instance can be regenerated on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::{corollary1_bound, cov_bounds, product_moment_gap, MonotoneStep};
use crate::lp::{enumerate_oracle, random_feasible_lp, solve, LpStatus};
use crate::measure::{
    product_of_marginals, random_common_marginal_pair_scaled, survival_sup_distance, DiscreteMeasure,
};
use crate::metrics::{bl1_distance, m1_distance, theorem2_bound, LpMetric};
use crate::transform::{copula_cdf, copula_sup_distance, push_back, survival_copula, to_copula};

pub const DEFAULT_SEED: u64 = 20240917;

pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

/// Outcome of a suite. Slack is `bound − observed`, or `−error` for
/// identities; a trial passes when its slack is at least `−tol`.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub passes: usize,
    pub worst_slack: f64,
    pub worst_seed: u64,
    pub tol: f64,
    /// Suite-specific statistic; for the `theorem2` suite, the largest
    /// observed m1 / √bl1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passes == self.trials
    }

    fn collect(suite: &str, tol: f64, outcomes: Vec<(u64, f64)>) -> Self {
        let mut r = SuiteReport {
            suite: suite.to_string(),
            trials: outcomes.len(),
            passes: 0,
            worst_slack: f64::INFINITY,
            worst_seed: outcomes.first().map_or(0, |o| o.0),
            tol,
            worst_ratio: None,
        };
        for (seed, slack) in outcomes {
            // NaN counts as a failure and as the worst case
            if slack >= -tol {
                r.passes += 1;
            }
            if !(slack >= r.worst_slack) {
                r.worst_slack = slack;
                r.worst_seed = seed;
            }
        }
        r
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be at least 1".into()));
    }
    Ok(())
}

/// Random nonnegative nondecreasing step function with breakpoints on the
/// half-integer grid in [0, hi]; one time in four, the identity.
pub fn random_step<R: Rng>(rng: &mut R, hi: u32) -> MonotoneStep {
    if rng.random_range(0..4) == 0 {
        return MonotoneStep::identity();
    }
    let mut grid: Vec<f64> = (0..=2 * hi).map(|i| i as f64 / 2.0).collect();
    let m = rng.random_range(0..=3.min(grid.len()));
    let mut breakpoints = Vec::with_capacity(m);
    for _ in 0..m {
        let i = rng.random_range(0..grid.len());
        breakpoints.push(grid.swap_remove(i));
    }
    breakpoints.sort_by(f64::total_cmp);
    let mut v = rng.random_range(0.0..1.0);
    let mut values = vec![v];
    for _ in 0..m {
        v += rng.random_range(0.0..2.0);
        values.push(v);
    }
    MonotoneStep::new(breakpoints, values).expect("valid random step")
}

/// Random law on `{0, …, hi}^dim` with at most `max_atoms` atoms and
/// integer-proportional weights.
pub fn random_measure<R: Rng>(rng: &mut R, dim: usize, max_atoms: usize, hi: u32) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_atoms);
    let points = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0..=hi) as f64).collect())
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(1..=10) as f64).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasure::new(points, raw.iter().map(|w| w / total).collect()).expect("valid random measure")
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Config {
    pub trials: usize,
    pub seed: u64,
    /// Fixed dimension; when `None` trials alternate between 2 and 3.
    pub k: Option<usize>,
    /// Largest support size per axis.
    pub max_support: usize,
    /// Fixed metric; when `None` trials cycle through p = 1, 2, ∞.
    pub p: Option<f64>,
    pub tol: f64,
    /// Multiplies every coordinate of the generated pairs.
    pub scale: f64,
}

impl Default for Theorem2Config {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: DEFAULT_SEED,
            k: None,
            max_support: 6,
            p: None,
            tol: 1e-9,
            scale: 1.0,
        }
    }
}

const METRIC_CYCLE: [LpMetric; 3] = [LpMetric::L1, LpMetric::L2, LpMetric::LINF];

/// m1 ≤ theorem2_bound(bl1) on random common-marginal pairs. A trial whose
/// bl1 witness fails its independent check is also counted as a failure.
pub fn theorem2_suite(cfg: &Theorem2Config) -> Result<SuiteReport> {
    check_trials(cfg.trials)?;
    if cfg.max_support == 0 || cfg.k == Some(0) {
        return Err(Error::OutOfRange("support size and dimension must be at least 1".into()));
    }
    let fixed_p = cfg.p.map(LpMetric::new).transpose()?;
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = cfg.k.unwrap_or(2 + t % 2);
            let metric = fixed_p.unwrap_or(METRIC_CYCLE[(t / 2) % 3]);
            let n = rng.random_range(1..=cfg.max_support);
            let (p, q) = random_common_marginal_pair_scaled(seed, k, n, cfg.scale);
            let m1 = m1_distance(&p, &q)?;
            let bl = bl1_distance(&p, &q, metric)?;
            let slack = if bl.verify(&p, &q, metric).is_ok() {
                theorem2_bound(bl.value, k, metric) - m1
            } else {
                f64::NEG_INFINITY
            };
            let ratio = if bl.value > 0.0 { m1 / bl.value.sqrt() } else { 0.0 };
            Ok(((seed, slack), ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_ratio = outcomes.iter().map(|o| o.1).fold(0.0, f64::max);
    let mut r = SuiteReport::collect("theorem2", cfg.tol, outcomes.into_iter().map(|o| o.0).collect());
    r.worst_ratio = Some(worst_ratio);
    Ok(r)
}

/// The comonotone and independent Bernoulli(½) pairs on {0, 1}².
pub fn bernoulli_pair() -> (DiscreteMeasure, DiscreteMeasure) {
    let co = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).expect("valid measure");
    let ind = product_of_marginals(&co);
    (co, ind)
}

#[derive(Debug, Clone, Serialize)]
pub struct Cor1Config {
    pub trials: usize,
    pub seed: u64,
    pub k: Option<usize>,
    pub max_support: usize,
    pub tol: f64,
}

impl Default for Cor1Config {
    fn default() -> Self {
        Self {
            trials: 500,
            seed: DEFAULT_SEED,
            k: None,
            max_support: 6,
            tol: 1e-12,
        }
    }
}

/// |∫ ∏ g_k d(P − Q)| ≤ corollary1_bound. Trial 0 is the Bernoulli pair with
/// identity functions, where the bound is attained.
pub fn cor1_suite(cfg: &Cor1Config) -> Result<SuiteReport> {
    check_trials(cfg.trials)?;
    if cfg.max_support == 0 || cfg.k == Some(0) {
        return Err(Error::OutOfRange("support size and dimension must be at least 1".into()));
    }
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.seed, t);
            let (p, q, gs) = if t == 0 {
                let (p, q) = bernoulli_pair();
                (p, q, vec![MonotoneStep::identity(); 2])
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let k = cfg.k.unwrap_or(2 + t % 2);
                let n = rng.random_range(1..=cfg.max_support);
                let (p, q) = random_common_marginal_pair_scaled(seed, k, n, 1.0);
                let hi = 4 * n as u32;
                let gs = (0..k).map(|_| random_step(&mut rng, hi)).collect();
                (p, q, gs)
            };
            let slack = corollary1_bound(&p, &q, &gs)? - product_moment_gap(&p, &q, &gs)?;
            Ok((seed, slack))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::collect("cor1", cfg.tol, outcomes))
}

/// Cov ≤ Rio bound and Cov ≤ `corollary2_bound` on random laws on
/// `{0, …, 3}²` with at most four atoms. Returns the two reports in that order.
pub fn cov_suite(trials: usize, seed: u64, tol: f64) -> Result<(SuiteReport, SuiteReport)> {
    check_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let j = random_measure(&mut rng, 2, 4, 3);
            let (gy, gz) = (random_step(&mut rng, 3), random_step(&mut rng, 3));
            let r = cov_bounds(&j, &gy, &gz)?;
            Ok(((s, r.rio_bound - r.cov), (s, r.cor2_bound - r.cov)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rio, cor2) = outcomes.into_iter().unzip();
    Ok((
        SuiteReport::collect("cov_rio", tol, rio),
        SuiteReport::collect("cov_cor2", tol, cor2),
    ))
}

/// survival_sup_distance(P, Q) equals the survival-copula distance of the
/// copulas on random common-marginal pairs.
pub fn copula_equality_suite(trials: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    check_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let k = 2 + t % 2;
            let n = rng.random_range(1..=6);
            let (p, q) = random_common_marginal_pair_scaled(s, k, n, 1.0);
            let x_scale = survival_sup_distance(&p, &q)?;
            let u_scale = copula_sup_distance(&to_copula(&p), &to_copula(&q))?;
            Ok((s, -(x_scale - u_scale).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::collect("copula_equality", tol, outcomes))
}

/// Structural checks on `to_copula(P)` for random P: uniform marginals on a
/// 101-point grid, grounded and normalized, 1-Lipschitz in the ℓ₁ norm for
/// both the distribution and survival functions, and the round trip
/// `push_back(to_copula(P), marginals of P) = P`.
pub fn copula_property_suite(trials: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    check_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let k = 1 + t % 3;
            let p = random_measure(&mut rng, k, 6, 3);
            let c = to_copula(&p);
            let mut err = 0.0f64;
            for axis in 0..k {
                for i in 0..=100 {
                    let t = i as f64 / 100.0;
                    err = err.max((c.marginal_cdf(axis, t) - t).abs());
                }
                let mut u = vec![1.0; k];
                u[axis] = 0.0;
                err = err.max(copula_cdf(&c, &u)?.abs());
            }
            err = err.max((copula_cdf(&c, &vec![1.0; k])? - 1.0).abs());
            for _ in 0..20 {
                let u: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=1.0)).collect();
                let v: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=1.0)).collect();
                let l1: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
                let d_cdf = (copula_cdf(&c, &u)? - copula_cdf(&c, &v)?).abs();
                let d_surv = (survival_copula(&c, &u)? - survival_copula(&c, &v)?).abs();
                err = err.max(d_cdf - l1).max(d_surv - l1);
            }
            let back = push_back(&c, &p.marginals())?;
            if !back.approx_eq(&p, tol) {
                err = f64::INFINITY;
            }
            Ok((s, -err))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::collect("copula_properties", tol, outcomes))
}

/// `solve` against `enumerate_oracle` on random feasible LPs with at most
/// `max_vars` variables. Slack is `−|value difference|`; a status
/// disagreement is a failure.
pub fn lp_selftest(trials: usize, seed: u64, max_vars: usize, tol: f64) -> Result<SuiteReport> {
    check_trials(trials)?;
    if max_vars == 0 || max_vars > crate::lp::ORACLE_MAX_VARS {
        return Err(Error::OutOfRange(format!(
            "max_vars must be in 1..={}",
            crate::lp::ORACLE_MAX_VARS
        )));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let nv = rng.random_range(1..=max_vars);
            let rows = rng.random_range(1..=nv + 4);
            let lp = random_feasible_lp(s, nv, rows);
            let a = solve(&lp)?;
            let b = enumerate_oracle(&lp)?;
            let slack = match (a.status, b.status) {
                (LpStatus::Optimal, LpStatus::Optimal) => -(a.value - b.value).abs(),
                (x, y) if x == y => 0.0,
                _ => f64::NEG_INFINITY,
            };
            Ok((s, slack))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::collect("lp_selftest", tol, outcomes))
}

/// Independent re-check of bl1 witnesses on random common-marginal pairs,
/// cycling through p = 1, 2, ∞.
pub fn witness_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    check_trials(trials)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let k = 2 + t % 2;
            let n = rng.random_range(1..=6);
            let (p, q) = random_common_marginal_pair_scaled(s, k, n, 1.0);
            let metric = METRIC_CYCLE[t % 3];
            let ok = bl1_distance(&p, &q, metric)?.verify(&p, &q, metric).is_ok();
            Ok((s, if ok { 0.0 } else { f64::NEG_INFINITY }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::collect("bl1_witness", 0.0, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collect_tracks_worst() {
        let r = SuiteReport::collect("x", 0.1, vec![(1, 0.5), (2, -0.05), (3, -0.2), (4, 1.0)]);
        assert_eq!((r.trials, r.passes, r.worst_seed), (4, 3, 3));
        assert_eq!(r.worst_slack, -0.2);
        let r = SuiteReport::collect("x", 0.1, vec![(1, 0.5), (2, f64::NAN)]);
        assert_eq!((r.passes, r.worst_seed), (1, 2));
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(theorem2_suite(&Theorem2Config { trials: 0, ..Default::default() }).is_err());
        assert!(cor1_suite(&Cor1Config { trials: 0, ..Default::default() }).is_err());
        assert!(cov_suite(0, 1, 1e-12).is_err());
        assert!(lp_selftest(0, 1, 6, 1e-7).is_err());
        assert!(lp_selftest(5, 1, 11, 1e-7).is_err());
    }

    #[test]
    fn small_suites_pass() {
        let t2 = theorem2_suite(&Theorem2Config { trials: 12, ..Default::default() }).unwrap();
        assert!(t2.all_passed(), "{t2:?}");
        let c1 = cor1_suite(&Cor1Config { trials: 10, ..Default::default() }).unwrap();
        assert!(c1.all_passed(), "{c1:?}");
        let (rio, cor2) = cov_suite(10, 5, 1e-12).unwrap();
        assert!(rio.all_passed() && cor2.all_passed());
        assert!(copula_equality_suite(10, 5, 1e-12).unwrap().all_passed());
        assert!(copula_property_suite(10, 5, 1e-12).unwrap().all_passed());
        assert!(lp_selftest(10, 5, 6, 1e-7).unwrap().all_passed());
    }

    #[test]
    fn cor1_trial_zero_is_tight() {
        let r = cor1_suite(&Cor1Config { trials: 1, ..Default::default() }).unwrap();
        assert_eq!(r.worst_slack, 0.0);
    }

    #[test]
    fn random_step_is_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let g = random_step(&mut rng, 5);
            let xs: Vec<f64> = (0..=50).map(|i| i as f64 / 5.0 - 1.0).collect();
            assert!(xs.windows(2).all(|w| g.eval(w[0]) <= g.eval(w[1])));
            assert!(g.is_identity() || g.eval(-1.0) >= 0.0);
        }
    }
}
