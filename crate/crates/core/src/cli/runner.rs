use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{ConfigError, ExperimentConfig, ExperimentKind};
use super::report::RunReport;
use crate::error::Error;
use crate::path::generate_path;
use crate::rng::StreamSpec;
use crate::stopping::causality_audit;
use crate::verify::{
    dyadic_convergence_study, hitting_time_cdf_test, increment_independence_test,
    reflection_char_test, running_max_ks_test, Mode, TestReport,
};

/// Why an experiment could not produce a verdict.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Verify(#[from] Error),
}

struct Verdict {
    statistic: f64,
    threshold: f64,
    pass: bool,
    n: usize,
    details: Value,
}

impl From<TestReport> for Verdict {
    fn from(r: TestReport) -> Self {
        Verdict {
            statistic: r.statistic,
            threshold: r.threshold,
            pass: r.passed,
            n: r.n,
            details: r.details,
        }
    }
}

/// Runs the experiment named by `config` and returns its report.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, RunError> {
    config.validate()?;
    let started = Instant::now();
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    let verdict = execute(config)?;
    Ok(RunReport {
        experiment: config.experiment.as_str().to_owned(),
        config: config.clone(),
        statistic: verdict.statistic.is_finite().then_some(verdict.statistic),
        threshold: verdict.threshold,
        pass: verdict.pass,
        n: verdict.n,
        seed: config.seed,
        details: verdict.details,
        elapsed_ms: started.elapsed().as_millis() as u64,
        timestamp,
    })
}

fn execute(c: &ExperimentConfig) -> Result<Verdict, RunError> {
    let grid = c.grid()?;
    let mode = || c.mode.unwrap_or(Mode::BridgeCorrected);
    let t = || c.t.expect("validated");
    Ok(match c.experiment {
        ExperimentKind::ReflectionChar => {
            let rule = c.stopping_rule()?;
            reflection_char_test(&grid, rule.as_ref(), &c.functional()?, c.paths, c.seed, c.z)?.into()
        }
        ExperimentKind::HittingCdf => {
            let x = c.x.expect("validated");
            hitting_time_cdf_test(x, t(), &grid, c.paths, c.seed, mode(), c.z)?.into()
        }
        ExperimentKind::RunningMax => running_max_ks_test(t(), &grid, c.paths, c.seed, mode())?.into(),
        ExperimentKind::Independence => {
            let event = c.path_event()?;
            let s = c.s.expect("validated");
            let future = c.future_times.as_deref().expect("validated");
            match increment_independence_test(
                &grid,
                s,
                future,
                &c.test_functional()?,
                event.as_ref(),
                c.paths,
                c.seed,
                c.z,
            ) {
                Ok(r) => r.into(),
                Err(e @ Error::AntiCausalEvent(_)) => Verdict {
                    statistic: f64::INFINITY,
                    threshold: c.z,
                    pass: false,
                    n: c.paths,
                    details: json!({ "error": e.to_string() }),
                },
                Err(e) => return Err(e.into()),
            }
        }
        ExperimentKind::DyadicStudy => {
            let rule = c.stopping_rule()?;
            let levels = c.j_values.as_deref().expect("validated");
            let reports =
                dyadic_convergence_study(&grid, rule.as_ref(), &c.functional()?, levels, c.paths, c.seed, c.z)?;
            let worst = reports.iter().map(|r| r.statistic).fold(0.0, f64::max);
            Verdict {
                statistic: worst,
                threshold: c.z,
                pass: reports.iter().all(|r| r.passed),
                n: c.paths,
                details: json!({ "levels": reports }),
            }
        }
        ExperimentKind::CausalityAudit => {
            let rule = c.stopping_rule()?;
            let trials = c.trials.expect("validated");
            let audits = (0..c.paths as u64)
                .into_par_iter()
                .map(|i| {
                    let spec = StreamSpec::new(c.seed, i);
                    let path = generate_path(&grid, spec);
                    causality_audit(rule.as_ref(), &path, spec.lane(4), trials)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let failures = audits.iter().filter(|a| !a.passed).count();
            let first = audits.iter().enumerate().find(|(_, a)| !a.passed).map(|(i, a)| {
                let cx = a.counterexample.as_ref().expect("failed audits carry one");
                json!({
                    "path": i,
                    "trial": cx.trial,
                    "cut": cx.cut,
                    "original": a.original,
                    "perturbed": cx.decision,
                    "perturbed_final_value": cx.perturbed.value(cx.perturbed.len() - 1),
                })
            });
            Verdict {
                statistic: failures as f64,
                threshold: 0.0,
                pass: failures == 0,
                n: c.paths,
                details: json!({
                    "rule": rule.name(),
                    "failing_paths": failures,
                    "counterexample": first,
                }),
            }
        }
    })
}
