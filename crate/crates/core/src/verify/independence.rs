use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{require_paths, require_z, simulate, standardized, TestReport};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::{generate_path, resample_after, SamplePath};
use crate::rng::StreamSpec;
use crate::sum::{mean, mean_sd};

const AUDIT_PATHS: u64 = 32;
const AUDIT_TRIALS: usize = 8;

/// Bounded functional of the increments `B(t_i) - B(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunctional {
    Constant { value: f64 },
    /// `clamp(sum w_i dB_i, lower, upper)`
    ClampedLinear { weights: Vec<f64>, lower: f64, upper: f64 },
    /// `cos(sum w_i dB_i)`
    Cosine { weights: Vec<f64> },
}

impl TestFunctional {
    pub fn apply(&self, increments: &[f64]) -> f64 {
        let dot = |w: &[f64]| w.iter().zip(increments).map(|(w, d)| w * d).sum::<f64>();
        match self {
            TestFunctional::Constant { value } => *value,
            TestFunctional::ClampedLinear { weights, lower, upper } => {
                dot(weights).clamp(*lower, *upper)
            }
            TestFunctional::Cosine { weights } => dot(weights).cos(),
        }
    }

    fn validate(&self, arity: usize) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParameter { name: "test_fn", reason });
        match self {
            TestFunctional::Constant { value } if !value.is_finite() => {
                bad(format!("constant must be finite, got {value}"))
            }
            TestFunctional::ClampedLinear { lower, upper, .. }
                if !(lower.is_finite() && upper.is_finite() && lower <= upper) =>
            {
                bad(format!("clamp bounds must be finite and ordered, got [{lower}, {upper}]"))
            }
            TestFunctional::ClampedLinear { weights, .. } | TestFunctional::Cosine { weights }
                if weights.len() != arity =>
            {
                bad(format!("{} weights for {arity} future times", weights.len()))
            }
            _ => Ok(()),
        }
    }
}

/// An event decided by a path. Events used for independence checks must be
/// determined by the path up to the conditioning time.
pub trait PathEvent: fmt::Debug + Send + Sync {
    fn name(&self) -> String;
    fn occurs(&self, path: &SamplePath) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CertainEvent;

impl PathEvent for CertainEvent {
    fn name(&self) -> String {
        "certain".into()
    }
    fn occurs(&self, _: &SamplePath) -> bool {
        true
    }
}

/// `{ B(time) > level }`; `time` must be a grid time.
#[derive(Debug, Clone, Copy)]
pub struct LevelAbove {
    pub time: f64,
    pub level: f64,
}

impl PathEvent for LevelAbove {
    fn name(&self) -> String {
        format!("B({}) > {}", self.time, self.level)
    }
    fn occurs(&self, path: &SamplePath) -> bool {
        path.value_at(self.time).is_ok_and(|v| v > self.level)
    }
}

/// `{ max_{u <= time} B(u) >= level }` on the grid.
#[derive(Debug, Clone, Copy)]
pub struct MaxReaches {
    pub time: f64,
    pub level: f64,
}

impl PathEvent for MaxReaches {
    fn name(&self) -> String {
        format!("max B[0,{}] >= {}", self.time, self.level)
    }
    fn occurs(&self, path: &SamplePath) -> bool {
        let end = path.grid().floor_index(self.time).unwrap_or(0);
        path.values()[..=end].iter().any(|&v| v >= self.level)
    }
}

/// Anti-causal fixture: looks at the last grid value.
#[derive(Debug, Clone, Copy, Default)]
pub struct FinalPositive;

impl PathEvent for FinalPositive {
    fn name(&self) -> String {
        "final value > 0".into()
    }
    fn occurs(&self, path: &SamplePath) -> bool {
        path.values()[path.len() - 1] > 0.0
    }
}

/// Resamples paths after `s_index` and checks the event never changes.
fn audit_event<E: PathEvent + ?Sized>(event: &E, grid: &TimeGrid, s_index: usize, seed: u64) -> Result<()> {
    for i in 0..AUDIT_PATHS {
        let spec = StreamSpec::new(seed, i).lane(2);
        let path = generate_path(grid, spec);
        let before = event.occurs(&path);
        let mut stream = spec.lane(3).open();
        for _ in 0..AUDIT_TRIALS {
            let mut perturbed = path.clone();
            resample_after(&mut perturbed, s_index, &mut stream);
            if event.occurs(&perturbed) != before {
                return Err(Error::AntiCausalEvent(event.name()));
            }
        }
    }
    Ok(())
}

/// Estimates `E[V 1_A] - E[V] P(A)` for `V = f(B(t_1) - B(s), ...)` and an
/// event `A` known at time `s`; passes when it is within `z` delta-method
/// standard errors of zero.
#[allow(clippy::too_many_arguments)]
pub fn increment_independence_test<E: PathEvent + ?Sized>(
    grid: &TimeGrid,
    s: f64,
    future_times: &[f64],
    f: &TestFunctional,
    event: &E,
    n_paths: usize,
    seed: u64,
    z: f64,
) -> Result<TestReport> {
    require_paths(n_paths, 2)?;
    require_z(z)?;
    let s_index = grid.require_index(s)?;
    if future_times.is_empty() {
        return Err(Error::InvalidParameter {
            name: "future_times",
            reason: "needs at least one time".into(),
        });
    }
    let future = future_times
        .iter()
        .map(|&t| grid.require_index(t))
        .collect::<Result<Vec<_>>>()?;
    if let Some(&t) = future_times.iter().find(|&&t| !(t > s)) {
        return Err(Error::InvalidParameter {
            name: "future_times",
            reason: format!("time {t} is not after s = {s}"),
        });
    }
    f.validate(future.len())?;
    audit_event(event, grid, s_index, seed)?;

    let draws = simulate(grid, n_paths, seed, |path, _| {
        let base = path.value(s_index);
        let inc: Vec<f64> = future.iter().map(|&i| path.value(i) - base).collect();
        (f.apply(&inc), if event.occurs(&path) { 1.0 } else { 0.0 })
    });
    let (v, a): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
    let va: Vec<f64> = v.iter().zip(&a).map(|(v, a)| v * a).collect();
    let (m_v, m_a, m_va) = (mean(&v), mean(&a), mean(&va));
    let diff = m_va - m_v * m_a;
    let influence: Vec<f64> = v
        .iter()
        .zip(&a)
        .zip(&va)
        .map(|((v, a), va)| va - m_a * v - m_v * a)
        .collect();
    let se = mean_sd(&influence).1 / (n_paths as f64).sqrt();

    Ok(
        TestReport::new("independence", standardized(diff, se), z, n_paths)
            .with_config(json!({
                "s": s,
                "future_times": future_times,
                "test_fn": f,
                "event": event.name(),
                "horizon": grid.horizon(),
                "steps": grid.len() - 1,
                "n_paths": n_paths,
                "seed": seed,
                "z": z,
            }))
            .with_details(json!({
                "difference": diff,
                "se": se,
                "mean_v": m_v,
                "p_event": m_a,
            })),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform_grid;

    fn clamp1() -> TestFunctional {
        TestFunctional::ClampedLinear { weights: vec![1.0], lower: -1.0, upper: 1.0 }
    }

    #[test]
    fn constant_functional_is_exact() {
        let g = uniform_grid(1.0, 8).unwrap();
        let f = TestFunctional::Constant { value: 1.0 };
        let ev = LevelAbove { time: 0.5, level: 0.0 };
        let r = increment_independence_test(&g, 0.5, &[1.0], &f, &ev, 4_000, 1, 4.0).unwrap();
        assert_eq!(r.details["difference"], 0.0);
        assert!(r.passed);
    }

    #[test]
    fn certain_event_is_exact() {
        let g = uniform_grid(1.0, 8).unwrap();
        let r = increment_independence_test(&g, 0.5, &[1.0], &clamp1(), &CertainEvent, 4_000, 1, 4.0)
            .unwrap();
        assert_eq!(r.details["difference"], 0.0);
        assert!(r.passed);
    }

    #[test]
    fn peeking_event_is_rejected() {
        let g = uniform_grid(1.0, 8).unwrap();
        let err = increment_independence_test(&g, 0.5, &[1.0], &clamp1(), &FinalPositive, 1_000, 1, 4.0)
            .unwrap_err();
        assert_eq!(err, Error::AntiCausalEvent("final value > 0".into()));
        let late = LevelAbove { time: 0.75, level: 0.0 };
        assert!(increment_independence_test(&g, 0.5, &[1.0], &clamp1(), &late, 1_000, 1, 4.0).is_err());
    }

    #[test]
    fn event_must_be_known_at_s() {
        let g = uniform_grid(1.0, 8).unwrap();
        let ev = LevelAbove { time: 0.5, level: 0.0 };
        let r = increment_independence_test(&g, 0.25, &[0.5], &clamp1(), &ev, 20_000, 4, 4.0);
        // event at 0.5 is not known at s = 0.25
        assert!(r.is_err());
        let ev = MaxReaches { time: 0.5, level: 0.2 };
        assert!(increment_independence_test(&g, 0.5, &[1.0], &clamp1(), &ev, 20_000, 4, 4.0)
            .unwrap()
            .passed);
    }

    #[test]
    fn validation() {
        let g = uniform_grid(1.0, 8).unwrap();
        let ev = CertainEvent;
        assert!(increment_independence_test(&g, 0.5, &[0.5], &clamp1(), &ev, 100, 1, 4.0).is_err());
        assert!(increment_independence_test(&g, 0.5, &[], &clamp1(), &ev, 100, 1, 4.0).is_err());
        let two = TestFunctional::Cosine { weights: vec![1.0, 1.0] };
        assert!(increment_independence_test(&g, 0.5, &[1.0], &two, &ev, 100, 1, 4.0).is_err());
        let bad = TestFunctional::ClampedLinear { weights: vec![1.0], lower: 1.0, upper: -1.0 };
        assert!(increment_independence_test(&g, 0.5, &[1.0], &bad, &ev, 100, 1, 4.0).is_err());
    }

    #[test]
    fn functional_values() {
        assert_eq!(clamp1().apply(&[3.0]), 1.0);
        assert_eq!(clamp1().apply(&[-0.25]), -0.25);
        let c = TestFunctional::Cosine { weights: vec![2.0, -1.0] };
        assert_eq!(c.apply(&[0.5, 1.0]), 1.0);
    }
}
