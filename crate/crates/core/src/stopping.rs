//! Stopping rules on discrete paths.
//!
//! A rule answers "stopped at or before index k?" from `values[..=k]` only.
//! The realized stopping time is the first index with a yes answer, or
//! [`StopDecision::Never`] when the rule never fires on the grid.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{resample_after, SamplePath};
use crate::rng::StreamSpec;

/// Realized value of a stopping time on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopDecision {
    At(usize),
    Never,
}

impl StopDecision {
    pub fn index(self) -> Option<usize> {
        match self {
            StopDecision::At(i) => Some(i),
            StopDecision::Never => None,
        }
    }

    /// Stopping time in grid units; `+inf` for `Never`.
    pub fn time(self, path: &SamplePath) -> f64 {
        match self {
            StopDecision::At(i) => path.grid().time(i),
            StopDecision::Never => f64::INFINITY,
        }
    }
}

impl fmt::Display for StopDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopDecision::At(i) => write!(f, "index {i}"),
            StopDecision::Never => f.write_str("never"),
        }
    }
}

/// A stopping rule. Implementations must be monotone in `k` and must not
/// read `path.values()[k + 1..]` when answering for `k`; the second
/// requirement is what [`causality_audit`] probes.
pub trait StoppingRule: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    /// Has the rule stopped at or before index `k`?
    fn stopped_by(&self, path: &SamplePath, k: usize) -> bool;

    /// Smallest index with a yes answer. The default scans left to right;
    /// overrides must return the same index.
    fn first_stop(&self, path: &SamplePath) -> StopDecision {
        (0..path.len())
            .find(|&k| self.stopped_by(path, k))
            .map_or(StopDecision::Never, StopDecision::At)
    }
}

impl<R: StoppingRule + ?Sized> StoppingRule for Arc<R> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn stopped_by(&self, path: &SamplePath, k: usize) -> bool {
        (**self).stopped_by(path, k)
    }
    fn first_stop(&self, path: &SamplePath) -> StopDecision {
        (**self).first_stop(path)
    }
}

/// First index at which `rule` answers yes, or `Never`.
pub fn evaluate_rule<R: StoppingRule + ?Sized>(rule: &R, path: &SamplePath) -> StopDecision {
    rule.first_stop(path)
}

/// Same result as [`evaluate_rule`], found by bisection on the monotone
/// yes/no sequence instead of a scan.
pub fn evaluate_rule_by_bisection<R: StoppingRule + ?Sized>(
    rule: &R,
    path: &SamplePath,
) -> StopDecision {
    let n = path.len();
    if n == 0 || !rule.stopped_by(path, n - 1) {
        return StopDecision::Never;
    }
    let (mut lo, mut hi) = (0usize, n - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if rule.stopped_by(path, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    StopDecision::At(lo)
}

/// T = +inf.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeverStop;

impl StoppingRule for NeverStop {
    fn name(&self) -> String {
        "never".into()
    }
    fn stopped_by(&self, _: &SamplePath, _: usize) -> bool {
        false
    }
}

/// T = 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct StopImmediately;

impl StoppingRule for StopImmediately {
    fn name(&self) -> String {
        "immediate".into()
    }
    fn stopped_by(&self, _: &SamplePath, _: usize) -> bool {
        true
    }
}

/// First grid time at or after a deterministic time.
#[derive(Debug, Clone, Copy)]
pub struct FixedTime {
    pub time: f64,
}

impl StoppingRule for FixedTime {
    fn name(&self) -> String {
        format!("fixed-time({})", self.time)
    }
    fn stopped_by(&self, path: &SamplePath, k: usize) -> bool {
        path.grid().time(k) >= self.time
    }
}

/// First grid index where the path reaches `level`: `value >= level` for a
/// nonnegative level, `value <= level` for a negative one.
#[derive(Debug, Clone, Copy)]
pub struct FirstHitting {
    pub level: f64,
}

impl FirstHitting {
    #[inline]
    pub fn crossed(&self, value: f64) -> bool {
        if self.level >= 0.0 {
            value >= self.level
        } else {
            value <= self.level
        }
    }
}

impl StoppingRule for FirstHitting {
    fn name(&self) -> String {
        format!("first-hit({})", self.level)
    }
    fn stopped_by(&self, path: &SamplePath, k: usize) -> bool {
        path.values()[..=k].iter().any(|&v| self.crossed(v))
    }
    fn first_stop(&self, path: &SamplePath) -> StopDecision {
        path.values()
            .iter()
            .position(|&v| self.crossed(v))
            .map_or(StopDecision::Never, StopDecision::At)
    }
}

/// Discretized hitting time of `level`.
pub fn first_hitting_rule(level: f64) -> FirstHitting {
    FirstHitting { level }
}

/// Anti-causal fixture: stops at 0 exactly when the final value is positive.
/// Not a stopping time; exists to exercise [`causality_audit`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PeekAtFinal;

impl StoppingRule for PeekAtFinal {
    fn name(&self) -> String {
        "peek-at-final".into()
    }
    fn stopped_by(&self, path: &SamplePath, _: usize) -> bool {
        path.values()[path.len() - 1] > 0.0
    }
}

/// Dyadic level above which `2^level` is not worth representing.
pub const MAX_DYADIC_LEVEL: u32 = 60;

/// Rounds a stopping time up to the dyadic lattice of mesh `2^-level`,
/// capped at `2^level`.
///
/// Times above the cap (including `+inf`) map to the cap; `0` maps to `0`;
/// any other time `t` maps to `k * 2^-level` with `(k-1) 2^-level < t <= k 2^-level`.
pub fn dyadic_approximation(t: f64, level: u32) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if level == 0 || level > MAX_DYADIC_LEVEL {
        return Err(Error::InvalidDyadicLevel(level));
    }
    let scale = (1u64 << level) as f64;
    if t > scale {
        return Ok(scale);
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    // power-of-two scaling is exact, so ceil sees the true bucket
    Ok((t * scale).ceil() / scale)
}

/// `inner` with its stopping time rounded up by [`dyadic_approximation`].
///
/// The rounded time is again a stopping time: T_j <= t exactly when the
/// inner rule has stopped by the last dyadic point not after t.
#[derive(Debug, Clone)]
pub struct DyadicRounded<R> {
    pub inner: R,
    pub level: u32,
}

impl<R: StoppingRule> DyadicRounded<R> {
    pub fn new(inner: R, level: u32) -> Result<Self> {
        dyadic_approximation(0.0, level)?;
        Ok(Self { inner, level })
    }

    fn scale(&self) -> f64 {
        (1u64 << self.level) as f64
    }
}

impl<R: StoppingRule> StoppingRule for DyadicRounded<R> {
    fn name(&self) -> String {
        format!("dyadic({}, j={})", self.inner.name(), self.level)
    }

    fn stopped_by(&self, path: &SamplePath, k: usize) -> bool {
        let scale = self.scale();
        let t = path.grid().time(k);
        if t >= scale {
            return true;
        }
        let lattice = (t * scale).floor() / scale;
        match path.grid().floor_index(lattice) {
            Some(i) => self.inner.stopped_by(path, i),
            None => false,
        }
    }

    fn first_stop(&self, path: &SamplePath) -> StopDecision {
        let t = self.inner.first_stop(path).time(path);
        let rounded = dyadic_approximation(t, self.level).expect("validated level");
        let grid = path.grid();
        if rounded > grid.horizon() {
            return StopDecision::Never;
        }
        // the first grid point at or after the rounded time
        let i = grid.times().partition_point(|&s| s < rounded);
        match grid.index_of(rounded) {
            Some(exact) => StopDecision::At(exact),
            None => StopDecision::At(i),
        }
    }
}

/// A perturbed path on which a rule's decision moved.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    /// Values at indices `> cut` were resampled.
    pub cut: usize,
    pub perturbed: SamplePath,
    pub decision: StopDecision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub rule: String,
    pub trials: usize,
    pub original: StopDecision,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

/// Checks that the decision on `path` ignores everything after it.
///
/// Each trial resamples the path strictly after the decided index (after a
/// random cut when the decision is `Never`) with fresh Brownian increments and
/// re-evaluates. For `Never`, the rule must still not fire at or before the cut.
pub fn causality_audit<R: StoppingRule + ?Sized>(
    rule: &R,
    path: &SamplePath,
    perturbation: StreamSpec,
    trials: usize,
) -> Result<AuditReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "must be at least 1".into(),
        });
    }
    let original = evaluate_rule(rule, path);
    let mut stream = perturbation.open();
    let last = path.len() - 1;
    for trial in 0..trials {
        let cut = match original {
            StopDecision::At(i) => i,
            StopDecision::Never => (stream.next_u64() % path.len() as u64) as usize,
        };
        if cut == last {
            continue;
        }
        let mut perturbed = path.clone();
        resample_after(&mut perturbed, cut, &mut stream);
        let decision = evaluate_rule(rule, &perturbed);
        let consistent = match (original, decision) {
            (StopDecision::At(_), d) => d == original,
            (StopDecision::Never, StopDecision::At(k)) => k > cut,
            (StopDecision::Never, StopDecision::Never) => true,
        };
        if !consistent {
            return Ok(AuditReport {
                rule: rule.name(),
                trials: trial + 1,
                original,
                passed: false,
                counterexample: Some(Counterexample {
                    trial,
                    cut,
                    perturbed,
                    decision,
                }),
            });
        }
    }
    Ok(AuditReport {
        rule: rule.name(),
        trials,
        original,
        passed: true,
        counterexample: None,
    })
}
