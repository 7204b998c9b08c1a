use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative tolerance used when matching a requested time to a grid point.
const TIME_MATCH_RTOL: f64 = 1e-12;

/// Strictly increasing sampling times starting at 0.
///
/// Cloning is cheap; paths share their grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Arc<[f64]>,
    sqrt_dt: Arc<[f64]>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        let first = *times.first().ok_or(Error::EmptyGrid)?;
        if first != 0.0 {
            return Err(Error::GridNotAnchored(first));
        }
        for (index, w) in times.windows(2).enumerate() {
            // also rejects NaN
            if !(w[0] < w[1]) || !w[1].is_finite() {
                return Err(Error::GridNotIncreasing {
                    index: index + 1,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        let sqrt_dt = times.windows(2).map(|w| (w[1] - w[0]).sqrt()).collect();
        Ok(Self {
            times: times.into(),
            sqrt_dt,
        })
    }

    /// `steps + 1` equally spaced times on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidHorizon(horizon));
        }
        if steps == 0 {
            return Err(Error::ZeroSteps);
        }
        let n = steps as f64;
        Self::new((0..=steps).map(|k| k as f64 * horizon / n).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Always false; a valid grid holds at least the origin.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn time(&self, index: usize) -> f64 {
        self.times[index]
    }

    /// Square roots of the step widths; `sqrt_dt()[k]` belongs to `(times[k], times[k+1])`.
    pub fn sqrt_dt(&self) -> &[f64] {
        &self.sqrt_dt
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.times[k + 1] - self.times[k]
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
        }
    }

    /// Index of the grid point equal to `t` up to rounding, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = TIME_MATCH_RTOL * t.abs().max(1.0);
        let i = self.times.partition_point(|&s| s < t - tol);
        (i < self.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }

    pub fn require_index(&self, t: f64) -> Result<usize> {
        self.index_of(t).ok_or(Error::TimeNotOnGrid(t))
    }

    /// Largest index whose time is `<= t` (up to rounding); `None` when `t < 0`.
    pub fn floor_index(&self, t: f64) -> Option<usize> {
        let tol = TIME_MATCH_RTOL * t.abs().max(1.0);
        self.times.partition_point(|&s| s <= t + tol).checked_sub(1)
    }
}

/// Equally spaced grid `k * horizon / steps`, `k = 0..=steps`.
pub fn uniform_grid(horizon: f64, steps: usize) -> Result<TimeGrid> {
    TimeGrid::uniform(horizon, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        assert_eq!(
            uniform_grid(1.0, 4).unwrap().times(),
            &[0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(uniform_grid(2.0, 1).unwrap().times(), &[0.0, 2.0]);
        assert_eq!(uniform_grid(1.0, 0), Err(Error::ZeroSteps));
        assert_eq!(uniform_grid(0.0, 3), Err(Error::InvalidHorizon(0.0)));
        assert_eq!(uniform_grid(-1.0, 3), Err(Error::InvalidHorizon(-1.0)));
        assert!(uniform_grid(f64::NAN, 3).is_err());
    }

    #[test]
    fn rejects_bad_times() {
        assert_eq!(TimeGrid::new(vec![]), Err(Error::EmptyGrid));
        assert_eq!(TimeGrid::new(vec![0.5, 1.0]), Err(Error::GridNotAnchored(0.5)));
        assert!(matches!(
            TimeGrid::new(vec![0.0, 1.0, 1.0]),
            Err(Error::GridNotIncreasing { index: 2, .. })
        ));
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
        assert_eq!(TimeGrid::new(vec![0.0]).unwrap().len(), 1);
    }

    #[test]
    fn lookup() {
        let g = uniform_grid(1.0, 10).unwrap();
        assert_eq!(g.index_of(0.3), Some(3));
        assert_eq!(g.index_of(0.1 + 0.2), Some(3));
        assert_eq!(g.index_of(0.35), None);
        assert_eq!(g.index_of(1.5), None);
        assert_eq!(g.floor_index(0.35), Some(3));
        assert_eq!(g.floor_index(0.3), Some(3));
        assert_eq!(g.floor_index(7.0), Some(10));
        assert_eq!(g.floor_index(-0.1), None);
        assert!(g.require_index(0.05).is_err());
    }
}
