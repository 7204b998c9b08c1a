use serde_json::json;

use super::{require_paths, simulate, Mode, TestReport, MONITORING_SHIFT};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::path::SamplePath;
use crate::rng::RandomStream;
use crate::verify::hitting::max_step;
use crate::verify::{ks_statistic, ks_threshold, running_max_cdf};

/// Allowance multiplier on the first-order raw-monitoring KS bias.
const RAW_BIAS_MARGIN: f64 = 1.5;

/// Maximum of `path` over `[0, times[until]]`.
///
/// Bridge-corrected mode draws the exact maximum of a Brownian bridge over
/// each step, `(a + b + sqrt((b - a)^2 - 2 dt ln U)) / 2`, from `stream`.
pub fn path_maximum(path: &SamplePath, until: usize, mode: Mode, stream: &mut RandomStream) -> f64 {
    let v = &path.values()[..=until];
    match mode {
        Mode::Raw => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Mode::BridgeCorrected => {
            let grid = path.grid();
            v.windows(2).enumerate().fold(0.0, |m, (k, w)| {
                let (a, b) = (w[0], w[1]);
                let u = stream.next_uniform();
                let d = b - a;
                let bridge_max = 0.5 * (a + b + (d * d - 2.0 * grid.dt(k) * u.ln()).sqrt());
                m.max(bridge_max)
            })
        }
    }
}

/// Per-path maxima over `[0, t]` in path order.
pub fn running_max_samples(
    grid: &TimeGrid,
    t: f64,
    n_paths: usize,
    seed: u64,
    mode: Mode,
) -> Result<Vec<f64>> {
    let until = grid.require_index(t)?;
    Ok(simulate(grid, n_paths, seed, |path, stream| path_maximum(&path, until, mode, stream)))
}

/// First-order KS gap caused by raw monitoring: the peak density of the
/// maximum, `2 phi(0) / sqrt t`, times the monitoring shift.
pub fn raw_max_ks_bias(t: f64, mesh: f64) -> f64 {
    2.0 / (2.0 * std::f64::consts::PI * t).sqrt() * MONITORING_SHIFT * mesh.sqrt()
}

/// KS distance between the per-path maxima and `2 Phi(x / sqrt t) - 1`.
pub fn running_max_ks_test(
    t: f64,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    mode: Mode,
) -> Result<TestReport> {
    require_paths(n_paths, 2)?;
    let until = grid.require_index(t)?;
    let t = grid.time(until);
    let samples = running_max_samples(grid, t, n_paths, seed, mode)?;
    let d = ks_statistic(&samples, |x| running_max_cdf(x, t))?;
    let allowance = match mode {
        Mode::Raw if until > 0 => RAW_BIAS_MARGIN * raw_max_ks_bias(t, max_step(grid, until)),
        _ => 0.0,
    };
    let base = ks_threshold(n_paths);
    Ok(TestReport::new("running-max", d, base + allowance, n_paths)
        .with_config(json!({
            "t": t,
            "horizon": grid.horizon(),
            "steps": grid.len() - 1,
            "n_paths": n_paths,
            "seed": seed,
            "mode": mode.as_str(),
        }))
        .with_details(json!({
            "null_threshold": base,
            "bias_allowance": allowance,
        })))
}
