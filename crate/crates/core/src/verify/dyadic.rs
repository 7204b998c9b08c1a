use serde_json::json;

use super::charfn::{char_details, spec_echo};
use super::{empirical_char_fn, require_paths, require_z, simulate, TestReport, MIN_CHAR_TEST_PATHS};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::reflection::LinearFunctionalSpec;
use crate::stopping::{dyadic_approximation, StopDecision, StoppingRule};
use crate::verify::analytic_char_fn;

/// Every grid time must round, at `level`, onto a grid time or past the horizon.
pub fn check_dyadic_resolution(grid: &TimeGrid, level: u32) -> Result<()> {
    let horizon = grid.horizon();
    for &t in grid.times() {
        let rounded = dyadic_approximation(t, level)?;
        if rounded <= horizon && grid.index_of(rounded).is_none() {
            return Err(Error::GridTooCoarse { level, time: rounded });
        }
    }
    Ok(())
}

/// Reflects at the rule's stopping time rounded up to each dyadic level and
/// runs the characteristic-function check on every level.
///
/// All levels share the same paths. A rounded time beyond the grid horizon
/// leaves the observed window unreflected. Each report carries the complex
/// distance to the analytic value for this level and for the unrounded time.
pub fn dyadic_convergence_study<R: StoppingRule + ?Sized>(
    grid: &TimeGrid,
    rule: &R,
    spec: &LinearFunctionalSpec,
    levels: &[u32],
    n_paths: usize,
    seed: u64,
    z: f64,
) -> Result<Vec<TestReport>> {
    require_paths(n_paths, MIN_CHAR_TEST_PATHS)?;
    require_z(z)?;
    if levels.is_empty() {
        return Err(Error::InvalidParameter {
            name: "j_values",
            reason: "needs at least one level".into(),
        });
    }
    for &level in levels {
        check_dyadic_resolution(grid, level)?;
    }
    let functional = spec.resolve(grid)?;
    let horizon = grid.horizon();

    let rows = simulate(grid, n_paths, seed, |path, _| {
        let stop = rule.first_stop(&path);
        let t = stop.time(&path);
        let mut row = Vec::with_capacity(levels.len() + 1);
        row.push(functional.evaluate_reflected(path.values(), stop));
        for &level in levels {
            let rounded = dyadic_approximation(t, level).expect("validated level");
            let at = if rounded > horizon {
                StopDecision::Never
            } else {
                StopDecision::At(grid.index_of(rounded).expect("resolution checked"))
            };
            row.push(functional.evaluate_reflected(path.values(), at));
        }
        row
    });

    let column = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<f64>>();
    let target = analytic_char_fn(spec);
    let base = empirical_char_fn(&column(0))?;
    let base_distance = (base.re - target).hypot(base.im);

    levels
        .iter()
        .enumerate()
        .map(|(c, &level)| {
            let est = empirical_char_fn(&column(c + 1))?;
            let mut details = char_details(&est, target);
            details["unrounded_distance"] = json!(base_distance);
            Ok(
                TestReport::new(format!("dyadic-study[j={level}]"), est.deviation_from(target), z, n_paths)
                    .with_config(json!({
                        "rule": rule.name(),
                        "level": level,
                        "functional": spec_echo(spec),
                        "horizon": horizon,
                        "steps": grid.len() - 1,
                        "n_paths": n_paths,
                        "seed": seed,
                        "z": z,
                    }))
                    .with_details(details),
            )
        })
        .collect()
}
