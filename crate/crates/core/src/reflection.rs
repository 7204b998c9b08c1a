//! The reflected path, linear functionals of a path, and their split into a
//! part known at the pivot time and an increment part after it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::SamplePath;
use crate::stopping::StopDecision;

/// Reflects `path` about its value at the stopping index.
///
/// Values up to and including the stop index are kept; each later value `v`
/// becomes `2 * path[stop] - v`. `Never` returns the path unchanged.
pub fn reflect(path: &SamplePath, stop: StopDecision) -> Result<SamplePath> {
    let mut out = path.clone();
    reflect_in_place(&mut out, stop)?;
    Ok(out)
}

pub fn reflect_in_place(path: &mut SamplePath, stop: StopDecision) -> Result<()> {
    let StopDecision::At(s) = stop else {
        return Ok(());
    };
    path.grid().check_index(s)?;
    let values = path.values_mut();
    let pivot = values[s];
    for v in &mut values[s + 1..] {
        *v = 2.0 * pivot - *v;
    }
    Ok(())
}

/// Times `t_1 < ... < t_n` (all positive) with one coefficient each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctionalSpec {
    times: Vec<f64>,
    coeffs: Vec<f64>,
}

impl LinearFunctionalSpec {
    pub fn new(times: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidFunctional("needs at least one time".into()));
        }
        if times.len() != coeffs.len() {
            return Err(Error::InvalidFunctional(format!(
                "{} times but {} coefficients",
                times.len(),
                coeffs.len()
            )));
        }
        if !(times[0] > 0.0) {
            return Err(Error::InvalidFunctional(format!(
                "times must be positive, got {}",
                times[0]
            )));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidFunctional(format!(
                "times must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(c) = times.iter().chain(&coeffs).find(|c| !c.is_finite()) {
            return Err(Error::InvalidFunctional(format!("non-finite entry {c}")));
        }
        Ok(Self { times, coeffs })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Same times, every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            times: self.times.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Variance of the functional under standard Brownian motion:
    /// `sum_{j,k} c_j c_k min(t_j, t_k)`.
    pub fn brownian_variance(&self) -> f64 {
        let mut var = 0.0;
        for (tj, cj) in self.times.iter().zip(&self.coeffs) {
            for (tk, ck) in self.times.iter().zip(&self.coeffs) {
                var += cj * ck * tj.min(*tk);
            }
        }
        var
    }

    /// Binds the times to grid indices.
    pub fn resolve(&self, grid: &TimeGrid) -> Result<ResolvedFunctional> {
        let indices = self
            .times
            .iter()
            .map(|&t| grid.require_index(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedFunctional {
            indices,
            coeffs: self.coeffs.clone(),
        })
    }
}

/// A [`LinearFunctionalSpec`] bound to the indices of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedFunctional {
    indices: Vec<usize>,
    coeffs: Vec<f64>,
}

impl ResolvedFunctional {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.coeffs)
            .map(|(&i, &c)| c * values[i])
            .sum()
    }

    /// Value of the functional on the path reflected at `stop`, reading the
    /// unreflected `values`.
    pub fn evaluate_reflected(&self, values: &[f64], stop: StopDecision) -> f64 {
        let StopDecision::At(s) = stop else {
            return self.evaluate(values);
        };
        let pivot = values[s];
        self.indices
            .iter()
            .zip(&self.coeffs)
            .map(|(&i, &c)| c * if i <= s { values[i] } else { 2.0 * pivot - values[i] })
            .sum()
    }

    pub fn decompose(&self, values: &[f64], pivot_index: usize) -> YZPair {
        let k = self.indices.partition_point(|&i| i <= pivot_index);
        let pivot = values[pivot_index];
        let (head_idx, tail_idx) = self.indices.split_at(k);
        let (head_c, tail_c) = self.coeffs.split_at(k);
        let head: f64 = head_idx.iter().zip(head_c).map(|(&i, &c)| c * values[i]).sum();
        let tail_weight: f64 = tail_c.iter().sum();
        let z: f64 = tail_idx
            .iter()
            .zip(tail_c)
            .map(|(&i, &c)| c * (values[i] - pivot))
            .sum();
        YZPair {
            y: head + tail_weight * pivot,
            z,
            pivot_index,
            k,
        }
    }

    /// Magnitude bound on every intermediate of [`Self::evaluate`] and
    /// [`Self::decompose`] at this pivot; the scale for rounding comparisons.
    pub fn rounding_scale(&self, values: &[f64], pivot_index: usize) -> f64 {
        let pivot = values[pivot_index].abs();
        self.indices
            .iter()
            .zip(&self.coeffs)
            .map(|(&i, &c)| c.abs() * (values[i].abs() + pivot))
            .sum()
    }
}

/// `sum_j c_j * B(t_j)` on `path`.
pub fn linear_functional(path: &SamplePath, spec: &LinearFunctionalSpec) -> Result<f64> {
    Ok(spec.resolve(path.grid())?.evaluate(path.values()))
}

/// Split of a linear functional at a pivot time `a`.
///
/// `y` collects the terms at times `<= a` plus the remaining weight placed
/// at `B(a)`; `z` is the weighted sum of increments `B(t_j) - B(a)` for the
/// times after `a`. `k` counts the functional times `<= a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YZPair {
    pub y: f64,
    pub z: f64,
    pub pivot_index: usize,
    pub k: usize,
}

pub fn yz_decomposition(
    path: &SamplePath,
    pivot_index: usize,
    spec: &LinearFunctionalSpec,
) -> Result<YZPair> {
    path.grid().check_index(pivot_index)?;
    let resolved = spec.resolve(path.grid())?;
    Ok(resolved.decompose(path.values(), pivot_index))
}

/// `|a - b|` within `ulps` units of roundoff at magnitude `scale`.
pub fn within_ulps(a: f64, b: f64, scale: f64, ulps: u32) -> bool {
    (a - b).abs() <= ulps as f64 * f64::EPSILON * scale.abs().max(f64::MIN_POSITIVE)
}
