use serde_json::json;

use super::{require_paths, require_z, simulate, Mode, TestReport, MONITORING_SHIFT};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::SamplePath;
use crate::sum::mean;
use crate::verify::normal_cdf;

/// Allowance multiplier on the first-order raw-monitoring bias.
const RAW_BIAS_MARGIN: f64 = 1.5;

/// Probability that `path` reaches `level > 0` by grid index `until`.
///
/// Raw mode returns the crossing indicator. Bridge-corrected mode returns 1
/// on a grid crossing and otherwise `1 - prod_k (1 - p_k)` with
/// `p_k = exp(-2 (level - a)(level - b) / dt)` for each step from `a` to `b`.
pub fn hitting_probability(path: &SamplePath, level: f64, until: usize, mode: Mode) -> f64 {
    let v = &path.values()[..=until];
    if v.iter().any(|&x| x >= level) {
        return 1.0;
    }
    match mode {
        Mode::Raw => 0.0,
        Mode::BridgeCorrected => {
            let grid = path.grid();
            let log_survival: f64 = v
                .windows(2)
                .enumerate()
                .map(|(k, w)| {
                    let p = (-2.0 * (level - w[0]) * (level - w[1]) / grid.dt(k)).exp();
                    (-p).ln_1p()
                })
                .sum();
            -log_survival.exp_m1()
        }
    }
}

/// First-order underestimate of `P(tau <= t)` from monitoring on a grid of
/// largest step `mesh`: density of the maximum at `level` times the
/// monitoring shift.
pub fn raw_hitting_bias(level: f64, t: f64, mesh: f64) -> f64 {
    let density = 2.0 * (-0.5 * level * level / t).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
    density * MONITORING_SHIFT * mesh.sqrt()
}

pub(crate) fn max_step(grid: &TimeGrid, until: usize) -> f64 {
    (0..until).map(|k| grid.dt(k)).fold(0.0, f64::max)
}

/// Estimates `P(tau_level <= t)` and compares it with `2 (1 - Phi(level / sqrt t))`.
///
/// Passes when the absolute gap is at most `z` binomial standard errors
/// (evaluated at the analytic probability), plus in raw mode an allowance of
/// 1.5 times [`raw_hitting_bias`].
pub fn hitting_time_cdf_test(
    level: f64,
    t: f64,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    mode: Mode,
    z: f64,
) -> Result<TestReport> {
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: format!("hitting level must be positive, got {level}"),
        });
    }
    require_paths(n_paths, 2)?;
    require_z(z)?;
    let until = grid.require_index(t)?;
    if until == 0 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "must be positive".into(),
        });
    }
    let t = grid.time(until);
    let probs = simulate(grid, n_paths, seed, |path, _| hitting_probability(&path, level, until, mode));
    let estimate = mean(&probs);
    let analytic = 2.0 * normal_cdf(-level / t.sqrt());
    let se = (analytic * (1.0 - analytic) / n_paths as f64).sqrt();
    let allowance = match mode {
        Mode::Raw => RAW_BIAS_MARGIN * raw_hitting_bias(level, t, max_step(grid, until)),
        Mode::BridgeCorrected => 0.0,
    };
    Ok(
        TestReport::new("hitting-cdf", (estimate - analytic).abs(), z * se + allowance, n_paths)
            .with_config(json!({
                "x": level,
                "t": t,
                "horizon": grid.horizon(),
                "steps": grid.len() - 1,
                "n_paths": n_paths,
                "seed": seed,
                "mode": mode.as_str(),
                "z": z,
            }))
            .with_details(json!({
                "estimate": estimate,
                "analytic": analytic,
                "se": se,
                "bias_allowance": allowance,
            })),
    )
}
