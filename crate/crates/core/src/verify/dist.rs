use crate::error::{Error, Result};

/// 99th percentile of `sqrt(n) * D_n` under the null, frozen from null
/// simulations at n = 1e5 (matches the Kolmogorov limit 1.6276).
pub const KS_NULL_Q99: f64 = 1.628;

/// Thresholds are this multiple of the null 99th percentile.
pub const KS_THRESHOLD_FACTOR: f64 = 1.5;

/// One-sample KS acceptance threshold for `n` samples.
pub fn ks_threshold(n: usize) -> f64 {
    KS_THRESHOLD_FACTOR * KS_NULL_Q99 / (n as f64).sqrt()
}

/// Two-sample KS acceptance threshold for sample sizes `n` and `m`.
pub fn ks_two_sample_threshold(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_THRESHOLD_FACTOR * KS_NULL_Q99 * ((n + m) / (n * m)).sqrt()
}

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF of `max_{s <= t} B_s`, which is also the CDF of `|B_t|`:
/// `2 Phi(x / sqrt t) - 1` for `x >= 0`.
pub fn running_max_cdf(x: f64, t: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::erf(x / (2.0 * t).sqrt())
    }
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        acc.max(above.abs()).max(below.abs())
    }))
}

/// Two-sample KS distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // step both ECDFs past every copy of the smaller value
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}
