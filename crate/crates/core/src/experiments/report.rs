//! Report assembly and serialization.

use std::io::Write;

use serde::Serialize;

use super::fit::RateFit;
use super::ExperimentError;
use crate::stability::{versioned_json, SchemeClassification};

/// One measured cell of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    /// Number of steps, or the log₂ step-ratio exponent in ratio sweeps.
    pub n: u32,
    pub value: f64,
    pub err_est: f64,
}

/// A named series with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Run {
    pub name: String,
    pub mode: String,
    pub theta: f64,
    pub s: f64,
    pub points: Vec<SeriesPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub verdict: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub scheme: String,
    pub classification: SchemeClassification,
    pub runs: Vec<Run>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentReport {
    pub fn new(scheme: &str, classification: SchemeClassification, runs: Vec<Run>) -> Self {
        let pass = runs.iter().all(|r| r.verdict);
        ExperimentReport {
            scheme: scheme.to_string(),
            classification,
            runs,
            pass,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_json(&self) -> String {
        versioned_json(self)
    }

    /// CSV with columns `scheme, mode, theta, s, n, value, err_est`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| ExperimentError::Io(e.to_string());
        w.write_record(["scheme", "mode", "theta", "s", "n", "value", "err_est"])
            .map_err(err)?;
        for run in &self.runs {
            for p in &run.points {
                w.write_record([
                    self.scheme.clone(),
                    run.mode.clone(),
                    run.theta.to_string(),
                    run.s.to_string(),
                    p.n.to_string(),
                    format!("{:e}", p.value),
                    format!("{:e}", p.err_est),
                ])
                .map_err(err)?;
            }
        }
        w.flush().map_err(|e| ExperimentError::Io(e.to_string()))
    }
}
