//! Statistical checks that reflected Brownian paths are again Brownian.
//!
//! Every check simulates paths keyed by `(seed, path index)`, reduces per-path
//! quantities in path order, and returns an immutable [`TestReport`]. Reports
//! are therefore identical across runs and thread counts.

mod charfn;
mod dist;
mod dyadic;
mod hitting;
mod independence;
mod running_max;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::{generate_path_from, SamplePath};
use crate::rng::{RandomStream, StreamSpec};

pub use charfn::{
    analytic_char_fn, empirical_char_fn, reflection_char_test, reflection_two_sample_test,
    CharFnEstimate, MIN_CHAR_TEST_PATHS,
};
pub use dist::{
    ks_statistic, ks_two_sample, ks_two_sample_threshold, ks_threshold, normal_cdf,
    running_max_cdf, KS_NULL_Q99, KS_THRESHOLD_FACTOR,
};
pub use dyadic::{check_dyadic_resolution, dyadic_convergence_study};
pub use hitting::{hitting_probability, hitting_time_cdf_test, raw_hitting_bias};
pub use independence::{
    increment_independence_test, CertainEvent, FinalPositive, LevelAbove, MaxReaches, PathEvent,
    TestFunctional,
};
pub use running_max::{raw_max_ks_bias, running_max_ks_test, running_max_samples};

/// Default confidence multiplier.
pub const DEFAULT_Z: f64 = 4.0;

/// Discrete-monitoring shift of the running maximum, `-zeta(1/2) / sqrt(2 pi)`.
/// A grid of mesh `h` sees the maximum about `MONITORING_SHIFT * sqrt(h)` low.
pub const MONITORING_SHIFT: f64 = 0.582_597_157_939_010_7;

/// How path extrema are monitored between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Grid values only.
    Raw,
    /// Each step is treated as a Brownian bridge between its endpoints.
    BridgeCorrected,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Raw => "raw",
            Mode::BridgeCorrected => "bridge-corrected",
        }
    }
}

/// Outcome of one statistical check. `passed` is exactly
/// `statistic <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
    pub n: usize,
    /// Inputs of the check, echoed.
    pub config: Value,
    /// Intermediate estimates (targets, standard errors, ...).
    pub details: Value,
}

impl TestReport {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, n: usize) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            passed: statistic <= threshold,
            n,
            config: Value::Null,
            details: Value::Null,
        }
    }

    pub fn with_config(mut self, config: Value) -> Self {
        self.config = config;
        self
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

/// `|deviation| / se`, with 0/0 read as 0 and x/0 as +inf.
pub fn standardized(deviation: f64, se: f64) -> f64 {
    let d = deviation.abs();
    if d == 0.0 {
        0.0
    } else if se > 0.0 {
        d / se
    } else {
        f64::INFINITY
    }
}

pub(crate) fn require_paths(n_paths: usize, needed: usize) -> Result<()> {
    if n_paths < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: n_paths,
        });
    }
    Ok(())
}

pub(crate) fn require_z(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter {
            name: "z",
            reason: format!("must be positive and finite, got {z}"),
        });
    }
    Ok(())
}

/// Runs `per_path` on `n_paths` Brownian paths, path `i` drawn from stream
/// `(seed, i)`. The open stream is handed over after the path is generated
/// for any per-path auxiliary draws. Output is in path order.
pub fn simulate<T, F>(grid: &TimeGrid, n_paths: usize, seed: u64, per_path: F) -> Vec<T>
where
    T: Send,
    F: Fn(SamplePath, &mut RandomStream) -> T + Sync,
{
    simulate_streams(grid, n_paths, |i| StreamSpec::new(seed, i as u64), per_path)
}

pub(crate) fn simulate_streams<T, F, S>(
    grid: &TimeGrid,
    n_paths: usize,
    stream_of: S,
    per_path: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(SamplePath, &mut RandomStream) -> T + Sync,
    S: Fn(usize) -> StreamSpec + Sync,
{
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut stream = stream_of(i).open();
            let path = generate_path_from(grid, &mut stream);
            per_path(path, &mut stream)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_pass_flag_follows_threshold() {
        assert!(TestReport::new("a", 1.0, 1.0, 10).passed);
        assert!(!TestReport::new("a", 1.0 + 1e-12, 1.0, 10).passed);
        assert!(!TestReport::new("a", f64::NAN, 1.0, 10).passed);
    }

    #[test]
    fn standardized_edge_cases() {
        assert_eq!(standardized(0.0, 0.0), 0.0);
        assert_eq!(standardized(1e-18, 0.0), f64::INFINITY);
        assert_eq!(standardized(-2.0, 0.5), 4.0);
    }

    #[test]
    fn simulate_is_order_stable() {
        let g = crate::grid::uniform_grid(1.0, 8).unwrap();
        let a = simulate(&g, 500, 3, |p, _| p.value(8));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate(&g, 500, 3, |p, _| p.value(8)));
        assert_eq!(a, b);
        assert_eq!(a[17], crate::path::generate_path(&g, StreamSpec::new(3, 17)).value(8));
    }
}
