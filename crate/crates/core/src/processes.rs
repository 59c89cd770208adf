//! Coupled simulation of a truncated linear process Y_t = Σ a_s Z_{t−s}
//! against the copy whose innovations at times ≤ 0 are replaced by an
//! independent sequence, and the experiment tracking how fast the two
//! bivariate laws (Y₀, Y_n) and (Y₀, Y′_n) merge as the lag grows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::measure::{survival_sup_distance, DiscreteMeasure};
use crate::metrics::{theorem2_bound, LpMetric};

pub const DEFAULT_TRUNCATION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Innovation {
    /// Standard normal.
    Normal,
    /// Uniform on [−1, 1].
    Uniform,
    /// ±1 with probability ½ each.
    Rademacher,
}

impl Innovation {
    /// E|Z₀|.
    pub fn mean_abs(self) -> f64 {
        match self {
            Innovation::Normal => (2.0 / std::f64::consts::PI).sqrt(),
            Innovation::Uniform => 0.5,
            Innovation::Rademacher => 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Innovation::Normal => StandardNormal.sample(rng),
            Innovation::Uniform => rng.random_range(-1.0..=1.0),
            Innovation::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Innovation::Normal),
            "uniform" => Ok(Innovation::Uniform),
            "rademacher" | "sign" => Ok(Innovation::Rademacher),
            other => Err(Error::Parse(format!("unknown innovation law '{other}'"))),
        }
    }
}

/// Coefficients a₀, …, a_T (zero beyond T) and the innovation law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearProcessSpec {
    coeffs: Vec<f64>,
    innovation: Innovation,
}

impl LinearProcessSpec {
    /// Explicit list a₀, …, a_T; the truncation is T = len − 1.
    pub fn explicit(coeffs: Vec<f64>, innovation: Innovation) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Empty("coefficient list"));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("coefficients"));
        }
        Ok(Self { coeffs, innovation })
    }

    /// a_s = ρ^s for s ≤ T.
    pub fn geometric(rho: f64, truncation: usize, innovation: Innovation) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::OutOfRange(format!("|rho| = {} must be below 1", rho.abs())));
        }
        if truncation == 0 {
            return Err(Error::OutOfRange("truncation must be at least 1".into()));
        }
        let coeffs = (0..=truncation).map(|s| rho.powi(s as i32)).collect();
        Ok(Self { coeffs, innovation })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn innovation(&self) -> Innovation {
        self.innovation
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Σ_{s ≥ n} |a_s|.
    pub fn tail_sum(&self, n: usize) -> f64 {
        self.coeffs.iter().skip(n).fold(0.0, |acc, a| acc + a.abs())
    }
}

/// Stream of innovations for one draw.
pub trait InnovationSource {
    fn next_innovation(&mut self) -> f64;
}

/// Seeded source: the ChaCha stream for `(seed, draw)`, so draws are
/// independent of each other and of the order they run in.
pub struct SeededSource {
    rng: ChaCha8Rng,
    law: Innovation,
}

impl SeededSource {
    pub fn new(seed: u64, draw: u64, law: Innovation) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw);
        Self { rng, law }
    }
}

impl InnovationSource for SeededSource {
    fn next_innovation(&mut self) -> f64 {
        self.law.sample(&mut self.rng)
    }
}

/// Paired draws: `x[i] = (Y₀, Y_n)` and `x_prime[i] = (Y₀, Y′_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub x: Vec<[f64; 2]>,
    pub x_prime: Vec<[f64; 2]>,
}

impl PairSample {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// r₁(X, X′) per draw. The first coordinates agree, so this is |Y_n − Y′_n|.
    pub fn displacements(&self) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.x_prime)
            .map(|(a, b)| (a[0] - b[0]).abs() + (a[1] - b[1]).abs())
            .collect()
    }

    /// Empirical laws of X and X′.
    pub fn empirical(&self) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        let to_measure = |pts: &[[f64; 2]]| DiscreteMeasure::uniform(pts.iter().map(|p| p.to_vec()).collect());
        Ok((to_measure(&self.x)?, to_measure(&self.x_prime)?))
    }
}

/// One draw. Innovations are consumed as Z_n, Z_{n−1}, …, Z_{−T}, then
/// Z′_0, Z′_{−1}, …, Z′_{n−T}.
fn one_draw<S: InnovationSource>(coeffs: &[f64], n: usize, src: &mut S) -> ([f64; 2], [f64; 2]) {
    let t = coeffs.len() - 1;
    // z[j] = Z_{n−j}
    let z: Vec<f64> = (0..=n + t).map(|_| src.next_innovation()).collect();
    let y0: f64 = coeffs.iter().enumerate().map(|(s, a)| a * z[n + s]).sum();
    let head: f64 = coeffs.iter().take(n).enumerate().map(|(s, a)| a * z[s]).sum();
    let mut tail = 0.0;
    let mut tail_prime = 0.0;
    for (s, a) in coeffs.iter().enumerate().skip(n) {
        tail += a * z[s];
        tail_prime += a * src.next_innovation();
    }
    ([y0, head + tail], [y0, head + tail_prime])
}

/// Simulate with a caller-supplied innovation source per draw index.
pub fn simulate_pair_with<S, F>(spec: &LinearProcessSpec, n: usize, samples: usize, source: F) -> Result<PairSample>
where
    S: InnovationSource,
    F: Fn(u64) -> S + Sync,
{
    if n == 0 {
        return Err(Error::OutOfRange("lag must be at least 1".into()));
    }
    if samples == 0 {
        return Err(Error::OutOfRange("sample count must be at least 1".into()));
    }
    let (x, x_prime) = (0..samples as u64)
        .into_par_iter()
        .map(|i| one_draw(&spec.coeffs, n, &mut source(i)))
        .unzip();
    Ok(PairSample { x, x_prime })
}

pub fn simulate_pair(spec: &LinearProcessSpec, n: usize, samples: usize, seed: u64) -> Result<PairSample> {
    let law = spec.innovation;
    simulate_pair_with(spec, n, samples, |i| SeededSource::new(seed, i, law))
}

/// 2 E|Z₀| Σ_{n ≤ s ≤ T} |a_s|, which bounds E r₁(X, X′) and hence the
/// bounded-Lipschitz distance between the two laws.
pub fn analytic_bound(spec: &LinearProcessSpec, n: usize) -> f64 {
    2.0 * spec.innovation.mean_abs() * spec.tail_sum(n)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub coupling_bound_emp: f64,
    pub coupling_bound_se: f64,
    pub analytic_bound: f64,
    pub survival_sup: f64,
    pub theorem2_of_coupling: f64,
}

pub const DECAY_COLUMNS: [&str; 6] = [
    "n",
    "coupling_bound_emp",
    "coupling_bound_se",
    "analytic_bound",
    "survival_sup",
    "theorem2_of_coupling",
];

/// Mean and standard error of the mean (sample standard deviation over √N;
/// zero for a single draw).
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One row per lag. Each lag uses its own simulation with the same seed.
pub fn decay_experiment(spec: &LinearProcessSpec, lags: &[usize], samples: usize, seed: u64) -> Result<Vec<DecayRow>> {
    if lags.is_empty() {
        return Err(Error::Empty("lag list"));
    }
    lags.iter()
        .map(|&n| {
            let sample = simulate_pair(spec, n, samples, seed)?;
            let (coupling_bound_emp, coupling_bound_se) = mean_se(&sample.displacements());
            let (p, q) = sample.empirical()?;
            Ok(DecayRow {
                n,
                coupling_bound_emp,
                coupling_bound_se,
                analytic_bound: analytic_bound(spec, n),
                survival_sup: survival_sup_distance(&p, &q)?,
                theorem2_of_coupling: theorem2_bound(coupling_bound_emp, 2, LpMetric::L1),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(f64);

    impl InnovationSource for Constant {
        fn next_innovation(&mut self) -> f64 {
            self.0
        }
    }

    fn geo(rho: f64, law: Innovation) -> LinearProcessSpec {
        LinearProcessSpec::geometric(rho, DEFAULT_TRUNCATION, law).unwrap()
    }

    #[test]
    fn analytic_bound_examples() {
        let b = analytic_bound(&geo(0.5, Innovation::Normal), 5);
        assert!((b - 0.0997356).abs() < 1e-6, "{b}");
        let e = LinearProcessSpec::explicit(vec![1.0, 0.5], Innovation::Normal).unwrap();
        assert_eq!(analytic_bound(&e, 3).to_bits(), 0.0f64.to_bits());
        let b = analytic_bound(&geo(0.5, Innovation::Rademacher), 1);
        assert!((b - 2.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_bound_nonincreasing() {
        for law in [Innovation::Normal, Innovation::Uniform, Innovation::Rademacher] {
            let spec = geo(-0.7, law);
            for n in 1..70 {
                assert!(analytic_bound(&spec, n + 1) <= analytic_bound(&spec, n));
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(LinearProcessSpec::geometric(1.0, 10, Innovation::Normal).is_err());
        assert!(LinearProcessSpec::geometric(0.5, 0, Innovation::Normal).is_err());
        assert!(LinearProcessSpec::explicit(vec![], Innovation::Normal).is_err());
        assert_eq!(geo(0.5, Innovation::Normal).truncation(), 64);
        assert_eq!("Rademacher".parse::<Innovation>().unwrap(), Innovation::Rademacher);
        assert!("cauchy".parse::<Innovation>().is_err());
    }

    #[test]
    fn shared_first_coordinate_and_determinism() {
        let spec = geo(0.8, Innovation::Normal);
        let a = simulate_pair(&spec, 3, 500, 7).unwrap();
        let b = simulate_pair(&spec, 3, 500, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.x.iter().zip(&a.x_prime).all(|(u, v)| u[0] == v[0]));
        assert_ne!(a, simulate_pair(&spec, 3, 500, 8).unwrap());
    }

    #[test]
    fn per_draw_bound_for_bounded_innovations() {
        for law in [Innovation::Uniform, Innovation::Rademacher] {
            let spec = geo(0.6, law);
            for n in [1, 2, 5, 10] {
                let cap = 2.0 * spec.tail_sum(n) + 1e-12;
                let s = simulate_pair(&spec, n, 2000, 11).unwrap();
                assert!(s.displacements().iter().all(|d| *d <= cap));
            }
        }
    }

    #[test]
    fn constant_innovations_give_no_displacement() {
        let spec = geo(0.5, Innovation::Rademacher);
        let s = simulate_pair_with(&spec, 2, 50, |_| Constant(1.0)).unwrap();
        assert!(s.displacements().iter().all(|d| *d == 0.0));
    }

    #[test]
    fn lag_zero_and_empty_sample_rejected() {
        let spec = geo(0.5, Innovation::Normal);
        assert!(simulate_pair(&spec, 0, 10, 1).is_err());
        assert!(simulate_pair(&spec, 1, 0, 1).is_err());
        assert!(decay_experiment(&spec, &[], 10, 1).is_err());
    }

    #[test]
    fn single_coefficient_process_has_identical_laws() {
        let spec = LinearProcessSpec::explicit(vec![1.0], Innovation::Normal).unwrap();
        let s = simulate_pair(&spec, 1, 1000, 3).unwrap();
        assert_eq!(s.x, s.x_prime);
        let rows = decay_experiment(&spec, &[1, 4], 1000, 3).unwrap();
        assert!(rows.iter().all(|r| r.survival_sup == 0.0 && r.coupling_bound_emp == 0.0));
    }

    #[test]
    fn decay_smoke_single_draw() {
        let rows = decay_experiment(&geo(0.5, Innovation::Normal), &[1], 1, 0).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        for v in [r.coupling_bound_emp, r.coupling_bound_se, r.analytic_bound, r.survival_sup, r.theorem2_of_coupling] {
            assert!(v.is_finite());
        }
    }
}
