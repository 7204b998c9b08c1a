use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rng::{RandomStream, StreamSpec};

/// One realized Brownian trajectory on a [`TimeGrid`], pinned at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::PathLengthMismatch {
                values: values.len(),
                times: grid.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::PathNotAnchored(values[0]));
        }
        Ok(Self { grid, values })
    }

    /// Path on `times` with the given values; convenient for fixtures.
    pub fn from_points(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(TimeGrid::new(times)?, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Value at grid time `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid.require_index(t)?])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Spacing of the lattice generated path values live on.
///
/// Increments are rounded to multiples of `2^-36`, so sums, differences and
/// reflections `2c - v` of generated values stay exact for magnitudes below
/// `2^16`. In particular reflecting a generated path twice returns it bit for
/// bit, which ordinary rounding cannot promise.
pub const VALUE_QUANTUM: f64 = 1.0 / (1u64 << 36) as f64;

fn quantize(x: f64) -> f64 {
    (x / VALUE_QUANTUM).round() * VALUE_QUANTUM
}

/// Brownian path on `grid` driven by the stream named by `stream`.
pub fn generate_path(grid: &TimeGrid, stream: StreamSpec) -> SamplePath {
    generate_path_from(grid, &mut stream.open())
}

/// Brownian path drawing its increments from an already open stream.
///
/// Consumes exactly `grid.len() - 1` normals, so callers may keep drawing
/// from `stream` afterwards for per-path auxiliary randomness.
pub fn generate_path_from(grid: &TimeGrid, stream: &mut RandomStream) -> SamplePath {
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut b = 0.0;
    for &s in grid.sqrt_dt() {
        b += quantize(s * stream.next_normal());
        values.push(b);
    }
    SamplePath {
        grid: grid.clone(),
        values,
    }
}

/// Overwrites `path.values[from + 1..]` with a fresh Brownian continuation
/// from `path.values[from]`, keeping the original step widths.
pub fn resample_after(path: &mut SamplePath, from: usize, stream: &mut RandomStream) {
    let grid = path.grid.clone();
    let values = path.values_mut();
    for k in from..values.len().saturating_sub(1) {
        values[k + 1] = values[k] + quantize(grid.sqrt_dt()[k] * stream.next_normal());
    }
}
