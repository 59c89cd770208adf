//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines always reach the output; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ipm_core::inequalities::{alpha_coefficient, corollary1_bound, covariance, product_moment_gap, MonotoneStep};
use ipm_core::measure::{random_common_marginal_pair, DiscreteMeasure};
use ipm_core::metrics::{bl1_distance, m1_distance, theorem2_bound, LpMetric};
use ipm_core::processes::{analytic_bound, decay_experiment, Innovation, LinearProcessSpec, DEFAULT_TRUNCATION};
use ipm_core::verify::{
    bernoulli_pair, copula_equality_suite, copula_property_suite, cov_suite, lp_selftest, theorem2_suite,
    witness_suite, SuiteReport, Theorem2Config, DEFAULT_SEED,
};

type Outcome = Result<String, String>;

fn suite_line(r: &SuiteReport) -> String {
    format!(
        "{} {}/{} worst slack {:.3e} (seed {})",
        r.suite, r.passes, r.trials, r.worst_slack, r.worst_seed
    )
}

fn suites(reports: &[SuiteReport]) -> Outcome {
    let line = reports.iter().map(suite_line).collect::<Vec<_>>().join("; ");
    if reports.iter().all(SuiteReport::all_passed) {
        Ok(line)
    } else {
        Err(line)
    }
}

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn theorem2_inequality() -> Outcome {
    let r = theorem2_suite(&Theorem2Config::default()).map_err(|e| e.to_string())?;
    suites(&[r])
}

fn copula_equality() -> Outcome {
    suites(&[copula_equality_suite(200, DEFAULT_SEED, 1e-12).map_err(|e| e.to_string())?])
}

fn bernoulli_certificates() -> Outcome {
    let (co, ind) = bernoulli_pair();
    let id = MonotoneStep::identity();
    let ids = vec![id.clone(), id.clone()];
    let m1 = m1_distance(&co, &ind).map_err(|e| e.to_string())?;
    let bl = bl1_distance(&co, &ind, LpMetric::L1).map_err(|e| e.to_string())?.value;
    let alpha = alpha_coefficient(&co).map_err(|e| e.to_string())?;
    let cov = covariance(&co, &id, &id).map_err(|e| e.to_string())?;
    let bound = corollary1_bound(&co, &ind, &ids).map_err(|e| e.to_string())?;
    let gap = product_moment_gap(&co, &ind, &ids).map_err(|e| e.to_string())?;
    let ok = m1 == 0.25
        && (bl - 1.0 / 3.0).abs() <= 1e-9
        && alpha == 0.5
        && cov == 0.25
        && bound == 0.25
        && gap == bound
        && bound / 2.0 < gap;
    check(
        ok,
        format!("m1 {m1}, bl1 {bl:.12}, alpha {alpha}, cov {cov}, cor1 bound {bound} vs gap {gap}, factor-free {}", bound / 2.0),
    )
}

fn lp_agreement() -> Outcome {
    let lp = lp_selftest(200, DEFAULT_SEED, 6, 1e-7).map_err(|e| e.to_string())?;
    let wit = witness_suite(200, DEFAULT_SEED).map_err(|e| e.to_string())?;
    suites(&[lp, wit])
}

fn covariance_bounds() -> Outcome {
    let (rio, cor2) = cov_suite(500, DEFAULT_SEED, 1e-12).map_err(|e| e.to_string())?;
    suites(&[rio, cor2])
}

fn copula_properties() -> Outcome {
    suites(&[copula_property_suite(200, DEFAULT_SEED, 1e-12).map_err(|e| e.to_string())?])
}

fn linear_process() -> Outcome {
    let spec = LinearProcessSpec::geometric(0.5, DEFAULT_TRUNCATION, Innovation::Normal).map_err(|e| e.to_string())?;
    let lags: Vec<usize> = (1..=8).collect();
    let rows = decay_experiment(&spec, &lags, 20000, DEFAULT_SEED).map_err(|e| e.to_string())?;
    let within = rows
        .iter()
        .all(|r| r.coupling_bound_emp <= r.analytic_bound + 3.0 * r.coupling_bound_se);
    let decays = rows[7].survival_sup < rows[0].survival_sup;
    let b5 = analytic_bound(&spec, 5);
    let ok = within && decays && (b5 - 0.0997356).abs() <= 1e-6;
    check(
        ok,
        format!(
            "coupling within 3 se at all lags: {within}; survival sup n=1 {:.4} -> n=8 {:.4}; bound(5) {b5:.7}",
            rows[0].survival_sup, rows[7].survival_sup
        ),
    )
}

fn one_dimensional() -> Outcome {
    let mut zero = true;
    for seed in 0..200u64 {
        let (p, _) = random_common_marginal_pair(seed, 1, 1 + (seed % 6) as usize);
        // same law, written with split and reordered atoms
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (x, w) in p.iter().collect::<Vec<_>>().into_iter().rev() {
            points.extend([x.to_vec(), x.to_vec()]);
            weights.extend([w / 4.0, 3.0 * w / 4.0]);
        }
        let q = DiscreteMeasure::new(points, weights).map_err(|e| e.to_string())?;
        zero &= m1_distance(&p, &q).map_err(|e| e.to_string())? == 0.0;
    }
    let t0 = theorem2_bound(0.0, 1, LpMetric::L1);
    check(zero && t0 == 0.0, format!("m1 exactly 0 on 200 pairs: {zero}; theorem2_bound(0) = {t0}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 8] = [
        ("1 theorem2 inequality", theorem2_inequality, Some(Duration::from_secs(120))),
        ("2 survival/copula equality", copula_equality, None),
        ("3 bernoulli certificates", bernoulli_certificates, None),
        ("4 lp oracle agreement", lp_agreement, None),
        ("5 covariance bounds", covariance_bounds, None),
        ("6 copula properties", copula_properties, None),
        ("7 linear process", linear_process, Some(Duration::from_secs(60))),
        ("8 one-dimensional degeneracy", one_dimensional, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let took = start.elapsed();
        if let (Some(limit), Ok(msg)) = (limit, &outcome) {
            if took > limit {
                outcome = Err(format!("{msg}; took {took:.1?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{took:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{took:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
