//! File formats.
//!
//! Measures are JSON, `{"dim": K, "atoms": [[...], ...], "weights": [...]}`
//! with `weights` optional (uniform when absent), or CSV with a header row,
//! K coordinate columns and an optional trailing column named `weight`.
//! Step functions are JSON, `{"breakpoints": [...], "values": [...]}`, or the
//! string `"identity"`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::inequalities::MonotoneStep;
use crate::measure::DiscreteMeasure;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    dim: usize,
    atoms: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

fn build_measure(dim: usize, atoms: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<DiscreteMeasure> {
    if dim == 0 {
        return Err(Error::OutOfRange("dim must be at least 1".into()));
    }
    if let Some(bad) = atoms.iter().find(|a| a.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    match weights {
        Some(w) => DiscreteMeasure::new(atoms, w),
        None => DiscreteMeasure::uniform(atoms),
    }
}

pub fn measure_from_json(text: &str) -> Result<DiscreteMeasure> {
    let f: MeasureFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    build_measure(f.dim, f.atoms, f.weights)
}

pub fn measure_from_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let weighted = header
        .iter()
        .next_back()
        .is_some_and(|h| h.eq_ignore_ascii_case("weight") || h.eq_ignore_ascii_case("weights"));
    let dim = header.len() - usize::from(weighted);
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let mut row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: '{field}' is not a number", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if weighted {
            weights.push(row.pop().unwrap_or(f64::NAN));
        }
        atoms.push(row);
    }
    build_measure(dim, atoms, weighted.then_some(weights))
}

/// Reads a measure file; `.csv` files are parsed as CSV, anything else as JSON.
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let text = fs::read_to_string(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        measure_from_csv(&text)
    } else {
        measure_from_json(&text)
    }
}

pub fn measure_to_json(p: &DiscreteMeasure) -> serde_json::Value {
    serde_json::json!({
        "dim": p.dim(),
        "atoms": p.atoms(),
        "weights": p.weights(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepFile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

// Dispatches on the JSON value by hand: untagged enums lose numbers when
// serde_json's arbitrary_precision feature is on elsewhere in the build.
pub fn step_from_json(text: &str) -> Result<MonotoneStep> {
    let parse_err = |e: serde_json::Error| Error::Parse(e.to_string());
    match serde_json::from_str::<serde_json::Value>(text).map_err(parse_err)? {
        serde_json::Value::String(name) if name.eq_ignore_ascii_case("identity") => Ok(MonotoneStep::identity()),
        serde_json::Value::String(name) => Err(Error::Parse(format!("unknown step function '{name}'"))),
        v => {
            let f: StepFile = serde_json::from_value(v).map_err(parse_err)?;
            MonotoneStep::new(f.breakpoints, f.values)
        }
    }
}

pub fn read_step(path: &Path) -> Result<MonotoneStep> {
    step_from_json(&fs::read_to_string(path)?)
}
