//! `ipm`: batch front end for the metric computations, the randomized
//! inequality suites and the linear-process experiment.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check is
//! violated, 2 for malformed input or configuration, 3 for other failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Number, Value};

use ipm_core::inequalities::cov_bounds;
use ipm_core::io::{read_measure, read_step};
use ipm_core::measure::{common_marginals_check, survival_sup_distance};
use ipm_core::metrics::{bl1_distance, m1_distance, theorem2_bound, LpMetric, MARGINAL_TOL};
use ipm_core::processes::{decay_experiment, Innovation, LinearProcessSpec, DECAY_COLUMNS, DEFAULT_TRUNCATION};
use ipm_core::verify::{cor1_suite, lp_selftest, theorem2_suite, Cor1Config, SuiteReport, Theorem2Config, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "ipm", version, about = "Integral probability metrics for discrete laws with common marginals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monotone-class and bounded-Lipschitz distances between two measure files.
    Metrics {
        p_file: PathBuf,
        q_file: PathBuf,
        /// Ground metric exponent: a number ≥ 1 or "inf".
        #[arg(long, default_value = "1")]
        p: String,
        #[command(flatten)]
        output: Output,
    },
    /// Random check of m1 ≤ theorem2_bound(bl1).
    VerifyTheorem2 {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Dimension; alternates between 2 and 3 when omitted.
        #[arg(long)]
        k: Option<usize>,
        /// Largest support size per axis.
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Metric exponent; cycles through 1, 2 and inf when omitted.
        #[arg(long)]
        p: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Multiply all generated coordinates by this factor.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Random check of the product-quantile bound; trial 0 is the Bernoulli pair.
    VerifyCor1 {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Covariance, mixing coefficient and both covariance bounds for a 2-D law.
    CovBounds {
        j_file: PathBuf,
        gy_file: PathBuf,
        gz_file: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Coupled linear-process experiment; CSV with one row per lag.
    LinearProcess {
        /// Geometric coefficients a_s = rho^s.
        #[arg(long, conflicts_with = "coeffs")]
        rho: Option<f64>,
        /// Explicit comma-separated coefficients a_0,…,a_T.
        #[arg(long, value_delimiter = ',')]
        coeffs: Option<Vec<f64>>,
        #[arg(long, default_value = "normal")]
        innovation: String,
        /// Comma-separated lags, or a range such as 1-8.
        #[arg(long, default_value = "1-8")]
        lags: String,
        #[arg(long, default_value_t = 20000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncation: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Simplex solver against the enumeration oracle on random programs.
    LpSelftest {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_vars: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<ipm_core::Error> for Failure {
    fn from(e: ipm_core::Error) -> Self {
        use ipm_core::Error as E;
        match e {
            E::Parse(_) | E::Io(_) => Failure::Input(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Report text and whether every check passed.
type Report = Result<(String, bool), Failure>;

/// 17 significant digits for every non-integer number.
fn full_precision(v: Value) -> Value {
    match v {
        Value::Number(n) if n.as_i64().is_none() && n.as_u64().is_none() => {
            let x = n.as_f64().expect("finite number");
            let text = format!("{:.16e}", x + 0.0);
            Value::Number(text.parse::<Number>().expect("valid JSON number"))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(full_precision).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, full_precision(v))).collect()),
        other => other,
    }
}

fn json_report(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&full_precision(v)).expect("serializable report");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable value")
}

fn metric_label(m: LpMetric) -> Value {
    if m.p().is_infinite() {
        json!("inf")
    } else {
        json!(m.p())
    }
}

fn parse_metric(s: &str) -> Result<LpMetric, Failure> {
    s.parse().map_err(|e: ipm_core::Error| Failure::Input(e.to_string()))
}

fn require(cond: bool, msg: &str) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure::Input(msg.to_string()))
    }
}

fn cmd_metrics(p_file: &PathBuf, q_file: &PathBuf, p: &str) -> Report {
    let metric = parse_metric(p)?;
    let pm = read_measure(p_file)?;
    let qm = read_measure(q_file)?;
    let common = common_marginals_check(&pm, &qm, MARGINAL_TOL)?;
    let m1 = if common { Some(m1_distance(&pm, &qm)?) } else { None };
    let bl = bl1_distance(&pm, &qm, metric)?;
    let report = json!({
        "config": {
            "p": metric_label(metric),
            "p_file": p_file,
            "q_file": q_file,
            "marginal_tol": MARGINAL_TOL,
        },
        "marginals_common": common,
        "m1": m1,
        "survival_sup": survival_sup_distance(&pm, &qm)?,
        "bl1": bl.value,
        "c0": bl.sup_part,
        "c1": bl.lip_part,
        "theorem2_bound": theorem2_bound(bl.value, pm.dim(), metric),
        "witness": {
            "points": bl.support,
            "values": bl.witness_values,
        },
    });
    Ok((json_report(report), true))
}

fn suite_report(config: Value, reports: &[SuiteReport]) -> (String, bool) {
    let ok = reports.iter().all(SuiteReport::all_passed);
    let body = if reports.len() == 1 {
        to_value(&reports[0])
    } else {
        to_value(&reports)
    };
    (json_report(json!({ "config": config, "result": body, "passed": ok })), ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_theorem2(
    trials: usize,
    seed: u64,
    k: Option<usize>,
    n: usize,
    p: Option<&str>,
    tol: f64,
    scale: f64,
) -> Report {
    require(trials >= 1, "trials must be at least 1")?;
    require(tol > 0.0, "tol must be positive")?;
    require(n >= 1 && k != Some(0), "k and n must be at least 1")?;
    require(scale > 0.0 && scale.is_finite(), "scale must be positive")?;
    let metric = p.map(parse_metric).transpose()?;
    let cfg = Theorem2Config {
        trials,
        seed,
        k,
        max_support: n,
        p: metric.map(|m| m.p()),
        tol,
        scale,
    };
    let r = theorem2_suite(&cfg)?;
    let config = json!({
        "trials": trials, "seed": seed, "k": k, "n": n,
        "p": metric.map(metric_label), "tol": tol, "scale": scale,
    });
    Ok(suite_report(config, &[r]))
}

fn cmd_verify_cor1(trials: usize, seed: u64, k: Option<usize>, n: usize, tol: f64) -> Report {
    require(trials >= 1, "trials must be at least 1")?;
    require(tol > 0.0, "tol must be positive")?;
    require(n >= 1 && k != Some(0), "k and n must be at least 1")?;
    let cfg = Cor1Config {
        trials,
        seed,
        k,
        max_support: n,
        tol,
    };
    let r = cor1_suite(&cfg)?;
    Ok(suite_report(to_value(&cfg), &[r]))
}

fn cmd_cov_bounds(j_file: &PathBuf, gy_file: &PathBuf, gz_file: &PathBuf, tol: f64) -> Report {
    require(tol > 0.0, "tol must be positive")?;
    let j = read_measure(j_file)?;
    let gy = read_step(gy_file)?;
    let gz = read_step(gz_file)?;
    let r = cov_bounds(&j, &gy, &gz)?;
    let rio_holds = r.cov <= r.rio_bound + tol;
    let cor2_holds = r.cov <= r.cor2_bound + tol;
    let mut report = to_value(&r);
    let obj = report.as_object_mut().expect("object");
    obj.insert(
        "config".into(),
        json!({ "j_file": j_file, "gy_file": gy_file, "gz_file": gz_file, "p": 1, "tol": tol }),
    );
    obj.insert("rio_holds".into(), json!(rio_holds));
    obj.insert("cor2_holds".into(), json!(cor2_holds));
    Ok((json_report(report), rio_holds && cor2_holds))
}

fn parse_lags(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Input(format!("bad lag list {s:?}"));
    let lags: Vec<usize> = if let Some((a, b)) = s.split_once('-') {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    require(!lags.is_empty() && lags.iter().all(|&n| n >= 1), "lags must be nonempty and at least 1")?;
    Ok(lags)
}

fn cmd_linear_process(
    rho: Option<f64>,
    coeffs: Option<Vec<f64>>,
    innovation: &str,
    lags: &str,
    samples: usize,
    seed: u64,
    truncation: usize,
) -> Report {
    let law: Innovation = innovation.parse()?;
    let lags = parse_lags(lags)?;
    require(samples >= 1, "samples must be at least 1")?;
    let rho = if coeffs.is_none() { Some(rho.unwrap_or(0.5)) } else { None };
    let spec = match (&coeffs, rho) {
        (Some(c), _) => LinearProcessSpec::explicit(c.clone(), law),
        (None, r) => LinearProcessSpec::geometric(r.unwrap_or(0.5), truncation, law),
    }
    .map_err(|e| Failure::Input(e.to_string()))?;
    let rows = decay_experiment(&spec, &lags, samples, seed)?;
    // the CSV keeps to the fixed columns; the configuration goes to stderr
    eprintln!(
        "{}",
        json!({
            "innovation": law, "rho": rho, "coeffs": coeffs, "truncation": spec.truncation(),
            "lags": lags, "samples": samples, "seed": seed,
        })
    );
    let mut out = DECAY_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let cells = [
            r.coupling_bound_emp,
            r.coupling_bound_se,
            r.analytic_bound,
            r.survival_sup,
            r.theorem2_of_coupling,
        ];
        out.push_str(&r.n.to_string());
        for c in cells {
            out.push_str(&format!(",{:.16e}", c + 0.0));
        }
        out.push('\n');
    }
    Ok((out, true))
}

fn cmd_lp_selftest(trials: usize, seed: u64, max_vars: usize, tol: f64) -> Report {
    require(trials >= 1, "trials must be at least 1")?;
    require(tol > 0.0, "tol must be positive")?;
    let r = lp_selftest(trials, seed, max_vars, tol).map_err(|e| Failure::Input(e.to_string()))?;
    let config = json!({ "trials": trials, "seed": seed, "max_vars": max_vars, "tol": tol });
    Ok(suite_report(config, &[r]))
}

fn run(command: Command) -> (Report, Option<PathBuf>) {
    match command {
        Command::Metrics { p_file, q_file, p, output } => (cmd_metrics(&p_file, &q_file, &p), output.out),
        Command::VerifyTheorem2 { trials, seed, k, n, p, tol, scale, output } => (
            cmd_verify_theorem2(trials, seed, k, n, p.as_deref(), tol, scale),
            output.out,
        ),
        Command::VerifyCor1 { trials, seed, k, n, tol, output } => (cmd_verify_cor1(trials, seed, k, n, tol), output.out),
        Command::CovBounds { j_file, gy_file, gz_file, tol, output } => {
            (cmd_cov_bounds(&j_file, &gy_file, &gz_file, tol), output.out)
        }
        Command::LinearProcess { rho, coeffs, innovation, lags, samples, seed, truncation, output } => (
            cmd_linear_process(rho, coeffs, &innovation, &lags, samples, seed, truncation),
            output.out,
        ),
        Command::LpSelftest { trials, seed, max_vars, tol, output } => {
            (cmd_lp_selftest(trials, seed, max_vars, tol), output.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, out) = run(cli.command);
    match report {
        Ok((text, ok)) => {
            let written = match &out {
                Some(path) => fs::write(path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("ipm: cannot write report: {e}");
                return ExitCode::from(3);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("ipm: check violated");
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("ipm: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("ipm: {msg}");
            ExitCode::from(3)
        }
    }
}
