//! Compensated summation with a fixed reduction order.
//!
//! Inputs are split into chunks of [`CHUNK`] elements; each chunk is summed
//! with Neumaier compensation and the chunk totals are combined left to right
//! the same way. The result depends only on the input order, never on how the
//! chunks were scheduled.

use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn chunk_sum(values: &[f64]) -> f64 {
    let mut acc = Neumaier::new();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}

/// Sum of `values`, chunks evaluated in parallel and reduced in order.
pub fn sum(values: &[f64]) -> f64 {
    let partials: Vec<f64> = values.par_chunks(CHUNK).map(chunk_sum).collect();
    chunk_sum(&partials)
}

pub fn mean(values: &[f64]) -> f64 {
    sum(values) / values.len() as f64
}

/// Mean and sample standard deviation (n - 1 denominator).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let m = mean(values);
    if n < 2 {
        return (m, 0.0);
    }
    let sq: Vec<f64> = values.par_iter().map(|v| (v - m) * (v - m)).collect();
    (m, (sum(&sq) / (n - 1) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_mass() {
        let mut v = vec![1e16, 1.0, -1e16];
        v.extend(std::iter::repeat_n(1.0, 10));
        assert_eq!(sum(&v), 11.0);
    }

    #[test]
    fn ones_sum_exactly() {
        let v = vec![1.0; 100_003];
        assert_eq!(sum(&v), 100_003.0);
        assert_eq!(mean(&v), 1.0);
        assert_eq!(mean_sd(&v), (1.0, 0.0));
    }

    #[test]
    fn repeatable_across_thread_pools() {
        let v: Vec<f64> = (0..50_000).map(|i| ((i * 7919) % 1000) as f64 * 0.1 - 50.0).collect();
        let a = sum(&v);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sum(&v));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn sample_sd() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
