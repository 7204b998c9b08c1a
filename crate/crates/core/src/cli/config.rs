//! Experiment configuration: a flat TOML document of typed keys.
//!
//! ```toml
//! experiment = "hitting-cdf"
//! horizon = 1.0
//! steps = 1024
//! paths = 100000
//! seed = 7
//! x = 0.5
//! t = 1.0
//! mode = "bridge-corrected"
//! ```
//!
//! Unknown keys, and keys the chosen experiment does not use, are errors.
//! Only `z` (4) and `format` (json) have defaults.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reflection::LinearFunctionalSpec;
use crate::stopping::{first_hitting_rule, FixedTime, NeverStop, PeekAtFinal, StopImmediately, StoppingRule};
use crate::verify::{
    CertainEvent, FinalPositive, LevelAbove, MaxReaches, Mode, PathEvent, TestFunctional, DEFAULT_Z,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("field `{field}` is required by experiment `{experiment}`")]
    Missing { field: &'static str, experiment: &'static str },
    #[error("field `{field}` is not used by experiment `{experiment}`")]
    Unused { field: &'static str, experiment: &'static str },
}

impl ConfigError {
    fn field(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Field {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ReflectionChar,
    HittingCdf,
    RunningMax,
    Independence,
    DyadicStudy,
    CausalityAudit,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::ReflectionChar => "reflection-char",
            ExperimentKind::HittingCdf => "hitting-cdf",
            ExperimentKind::RunningMax => "running-max",
            ExperimentKind::Independence => "independence",
            ExperimentKind::DyadicStudy => "dyadic-study",
            ExperimentKind::CausalityAudit => "causality-audit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Never,
    Immediate,
    FirstHit,
    FixedTime,
    /// Anti-causal fixture, only meaningful for `causality-audit`.
    PeekFinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFnKind {
    /// `clamp(sum of increments, -1, 1)`
    Clamp,
    /// `cos(sum of increments)`
    Cos,
    /// `1`
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Certain,
    /// `B(s) > event_level`
    HalfSpace,
    /// `max_{u <= s} B(u) >= event_level`
    MaxReaches,
    /// Anti-causal fixture: `B(horizon) > 0`.
    PeekFinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub future_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_fn: Option<TestFnKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<EventKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_values: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default = "default_z")]
    pub z: f64,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_z() -> f64 {
    DEFAULT_Z
}

/// Strict parse followed by [`ExperimentConfig::validate`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_owned()))?;
    config.validate()?;
    Ok(config)
}

/// Keys that are optional in the struct, with their presence.
fn optional_keys(c: &ExperimentConfig) -> [(&'static str, bool); 15] {
    [
        ("rule", c.rule.is_some()),
        ("rule_level", c.rule_level.is_some()),
        ("rule_time", c.rule_time.is_some()),
        ("times", c.times.is_some()),
        ("coeffs", c.coeffs.is_some()),
        ("mode", c.mode.is_some()),
        ("x", c.x.is_some()),
        ("t", c.t.is_some()),
        ("s", c.s.is_some()),
        ("future_times", c.future_times.is_some()),
        ("test_fn", c.test_fn.is_some()),
        ("event", c.event.is_some()),
        ("event_level", c.event_level.is_some()),
        ("j_values", c.j_values.is_some()),
        ("trials", c.trials.is_some()),
    ]
}

impl ExperimentConfig {
    fn kind(&self) -> &'static str {
        self.experiment.as_str()
    }

    /// Keys each experiment requires; any other optional key is rejected.
    fn required_keys(&self) -> Vec<&'static str> {
        let mut keys = match self.experiment {
            ExperimentKind::ReflectionChar => vec!["rule", "times", "coeffs"],
            ExperimentKind::HittingCdf => vec!["x", "t", "mode"],
            ExperimentKind::RunningMax => vec!["t", "mode"],
            ExperimentKind::Independence => vec!["s", "future_times", "test_fn", "event"],
            ExperimentKind::DyadicStudy => vec!["rule", "times", "coeffs", "j_values"],
            ExperimentKind::CausalityAudit => vec!["rule", "trials"],
        };
        match self.rule {
            Some(RuleKind::FirstHit) => keys.push("rule_level"),
            Some(RuleKind::FixedTime) => keys.push("rule_time"),
            _ => {}
        }
        if matches!(self.event, Some(EventKind::HalfSpace | EventKind::MaxReaches)) {
            keys.push("event_level");
        }
        keys
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let experiment = self.kind();
        let required = self.required_keys();
        for (key, present) in optional_keys(self) {
            let needed = required.contains(&key);
            if needed && !present {
                return Err(ConfigError::Missing { field: key, experiment });
            }
            if !needed && present {
                return Err(ConfigError::Unused { field: key, experiment });
            }
        }

        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ConfigError::field("horizon", format!("must be positive, got {}", self.horizon)));
        }
        if self.steps == 0 {
            return Err(ConfigError::field("steps", "must be at least 1"));
        }
        if self.paths == 0 {
            return Err(ConfigError::field("paths", "must be at least 1"));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(ConfigError::field("z", format!("must be positive, got {}", self.z)));
        }
        if self.trials == Some(0) {
            return Err(ConfigError::field("trials", "must be at least 1"));
        }
        if let Some(x) = self.x {
            if !(x > 0.0 && x.is_finite()) {
                return Err(ConfigError::field("x", format!("must be positive, got {x}")));
            }
        }
        if self.rule == Some(RuleKind::PeekFinal) && self.experiment != ExperimentKind::CausalityAudit {
            return Err(ConfigError::field("rule", "peek-final is not a stopping rule"));
        }
        if let Some(js) = &self.j_values {
            if js.is_empty() || js.contains(&0) {
                return Err(ConfigError::field("j_values", "levels must be a nonempty list of positive integers"));
            }
        }
        if self.times.is_some() {
            self.functional()?;
        }

        let grid = self.grid()?;
        let on_grid = |field: &'static str, t: f64| {
            grid.index_of(t)
                .map(|_| ())
                .ok_or_else(|| ConfigError::field(field, format!("time {t} is not on the grid")))
        };
        for (field, values) in [("times", &self.times), ("future_times", &self.future_times)] {
            for &t in values.iter().flatten() {
                on_grid(field, t)?;
            }
        }
        for (field, value) in [("t", self.t), ("s", self.s)] {
            if let Some(t) = value {
                on_grid(field, t)?;
            }
        }
        if let (Some(s), Some(fut)) = (self.s, &self.future_times) {
            if fut.is_empty() || fut.iter().any(|&t| !(t > s)) {
                return Err(ConfigError::field("future_times", format!("must be nonempty and after s = {s}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<crate::grid::TimeGrid, ConfigError> {
        crate::grid::uniform_grid(self.horizon, self.steps)
            .map_err(|e| ConfigError::field("steps", e.to_string()))
    }

    pub fn functional(&self) -> Result<LinearFunctionalSpec, ConfigError> {
        let times = self.times.clone().ok_or(ConfigError::Missing { field: "times", experiment: self.kind() })?;
        let coeffs = self.coeffs.clone().ok_or(ConfigError::Missing { field: "coeffs", experiment: self.kind() })?;
        LinearFunctionalSpec::new(times, coeffs).map_err(|e| ConfigError::field("times", e.to_string()))
    }

    pub fn stopping_rule(&self) -> Result<Box<dyn StoppingRule>, ConfigError> {
        let missing = |field| ConfigError::Missing { field, experiment: self.kind() };
        Ok(match self.rule.ok_or(missing("rule"))? {
            RuleKind::Never => Box::new(NeverStop),
            RuleKind::Immediate => Box::new(StopImmediately),
            RuleKind::FirstHit => Box::new(first_hitting_rule(self.rule_level.ok_or(missing("rule_level"))?)),
            RuleKind::FixedTime => Box::new(FixedTime { time: self.rule_time.ok_or(missing("rule_time"))? }),
            RuleKind::PeekFinal => Box::new(PeekAtFinal),
        })
    }

    pub fn test_functional(&self) -> Result<TestFunctional, ConfigError> {
        let arity = self.future_times.as_ref().map_or(0, Vec::len);
        Ok(match self.test_fn.ok_or(ConfigError::Missing { field: "test_fn", experiment: self.kind() })? {
            TestFnKind::Clamp => TestFunctional::ClampedLinear {
                weights: vec![1.0; arity],
                lower: -1.0,
                upper: 1.0,
            },
            TestFnKind::Cos => TestFunctional::Cosine { weights: vec![1.0; arity] },
            TestFnKind::Constant => TestFunctional::Constant { value: 1.0 },
        })
    }

    pub fn path_event(&self) -> Result<Box<dyn PathEvent>, ConfigError> {
        let missing = |field| ConfigError::Missing { field, experiment: self.kind() };
        let s = self.s.ok_or(missing("s"))?;
        Ok(match self.event.ok_or(missing("event"))? {
            EventKind::Certain => Box::new(CertainEvent),
            EventKind::HalfSpace => Box::new(LevelAbove { time: s, level: self.event_level.ok_or(missing("event_level"))? }),
            EventKind::MaxReaches => Box::new(MaxReaches { time: s, level: self.event_level.ok_or(missing("event_level"))? }),
            EventKind::PeekFinal => Box::new(FinalPositive),
        })
    }

    /// Renders the config back to the TOML form `parse_config` accepts.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }
}
