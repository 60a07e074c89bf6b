//! Result records and their CSV/JSON encodings.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub trial: usize,
    /// Master seed of the run.
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub probe: String,
    pub values: Vec<f64>,
    pub target: Option<f64>,
    /// `|values[0] - target|` when a target is present.
    pub error: Option<f64>,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, trial: usize, seed: u64, n: usize, k: usize, probe: impl Into<String>, values: Vec<f64>) -> Self {
        ExperimentRecord {
            experiment: experiment.to_string(),
            trial,
            seed,
            n,
            k,
            probe: probe.into(),
            values,
            target: None,
            error: None,
        }
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.error = self.values.first().map(|v| (v - target).abs());
        self.target = Some(target);
        self
    }
}

/// Shortest round-trip form; scientific notation outside `[1e-5, 1e16)`.
fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// CSV with header `experiment,trial,seed,n,k,probe,value1..valueM,target,error`,
/// where `M` is the longest value list; shorter rows are padded with empty cells.
pub fn to_csv(records: &[ExperimentRecord]) -> Result<String, LabError> {
    if records.is_empty() {
        return Err(LabError::EmptyResults);
    }
    let m = records.iter().map(|r| r.values.len()).max().unwrap_or(0);
    let mut out = String::from("experiment,trial,seed,n,k,probe");
    for i in 1..=m {
        write!(out, ",value{i}").unwrap();
    }
    out.push_str(",target,error\n");
    for r in records {
        write!(out, "{},{},{},{},{},{}", r.experiment, r.trial, r.seed, r.n, r.k, r.probe).unwrap();
        for i in 0..m {
            out.push(',');
            out.push_str(&fmt_opt(r.values.get(i).copied()));
        }
        writeln!(out, ",{},{}", fmt_opt(r.target), fmt_opt(r.error)).unwrap();
    }
    Ok(out)
}

pub fn to_json(records: &[ExperimentRecord]) -> Result<String, LabError> {
    if records.is_empty() {
        return Err(LabError::EmptyResults);
    }
    let mut s = serde_json::to_string_pretty(records)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Vec<ExperimentRecord>, LabError> {
    Ok(serde_json::from_str(text)?)
}

pub fn encode(records: &[ExperimentRecord], format: Format) -> Result<String, LabError> {
    match format {
        Format::Csv => to_csv(records),
        Format::Json => to_json(records),
    }
}

/// Writes the encoded records to `sink`.
pub fn emit(records: &[ExperimentRecord], format: Format, sink: &mut dyn Write) -> Result<(), LabError> {
    sink.write_all(encode(records, format)?.as_bytes())?;
    sink.flush()?;
    Ok(())
}
