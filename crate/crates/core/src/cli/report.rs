//! Report files.
//!
//! JSON layout (keys in this order):
//!
//! ```text
//! { experiment, config{...}, statistic, threshold, pass, n, seed,
//!   details, elapsed_ms, timestamp }
//! ```
//!
//! `elapsed_ms` and `timestamp` are the only wall-clock fields; everything
//! else is a function of `config`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{ExperimentConfig, OutputFormat};

/// Keys that carry wall-clock information.
pub const TIMING_FIELDS: [&str; 2] = ["elapsed_ms", "timestamp"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub statistic: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub n: usize,
    pub seed: u64,
    pub details: Value,
    pub elapsed_ms: u64,
    pub timestamp: String,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }

    /// One header row and one row per sub-result (per level for sweeps).
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let config = serde_json::to_string(&self.config).expect("config is plain data");
        w.write_record([
            "experiment", "label", "statistic", "threshold", "pass", "n", "seed", "elapsed_ms",
            "timestamp", "config",
        ])
        .expect("in-memory write");
        let fmt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        let mut row = |label: &str, statistic: Option<f64>, threshold: f64, pass: bool| {
            w.write_record([
                self.experiment.as_str(),
                label,
                &fmt(statistic),
                &threshold.to_string(),
                &pass.to_string(),
                &self.n.to_string(),
                &self.seed.to_string(),
                &self.elapsed_ms.to_string(),
                &self.timestamp,
                &config,
            ])
            .expect("in-memory write");
        };
        if let Some(levels) = self.details.get("levels").and_then(Value::as_array) {
            for level in levels {
                row(
                    level["name"].as_str().unwrap_or_default(),
                    level["statistic"].as_f64(),
                    level["threshold"].as_f64().unwrap_or(f64::NAN),
                    level["passed"].as_bool().unwrap_or(false),
                );
            }
        }
        row("overall", self.statistic, self.threshold, self.pass);
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

/// A JSON report with the timing fields removed, re-rendered.
pub fn mask_timing(json: &str) -> serde_json::Result<String> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Some(obj) = v.as_object_mut() {
        for key in TIMING_FIELDS {
            obj.remove(key);
        }
    }
    serde_json::to_string_pretty(&v)
}
