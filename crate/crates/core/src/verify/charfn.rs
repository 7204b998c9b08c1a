use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{require_paths, require_z, simulate, simulate_streams, standardized, TestReport};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::reflection::{reflect_in_place, LinearFunctionalSpec, ResolvedFunctional};
use crate::rng::StreamSpec;
use crate::stopping::{evaluate_rule, StoppingRule};
use crate::sum::mean_sd;
use crate::verify::{ks_two_sample, ks_two_sample_threshold};

pub const MIN_CHAR_TEST_PATHS: usize = 1000;

/// Monte Carlo estimate of `E[exp(iX)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharFnEstimate {
    pub re: f64,
    pub im: f64,
    pub n: usize,
    pub se_re: f64,
    pub se_im: f64,
}

impl CharFnEstimate {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Largest of the standardized real and imaginary deviations from a real target.
    pub fn deviation_from(&self, target: f64) -> f64 {
        standardized(self.re - target, self.se_re).max(standardized(self.im, self.se_im))
    }
}

/// Sample means of `cos x` and `sin x` with standard errors.
pub fn empirical_char_fn(samples: &[f64]) -> Result<CharFnEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let (cos, sin): (Vec<f64>, Vec<f64>) = samples.par_iter().map(|x| (x.cos(), x.sin())).unzip();
    let (re, sd_re) = mean_sd(&cos);
    let (im, sd_im) = mean_sd(&sin);
    let root_n = (n as f64).sqrt();
    Ok(CharFnEstimate {
        re,
        im,
        n,
        se_re: sd_re / root_n,
        se_im: sd_im / root_n,
    })
}

/// `E[exp(iX)]` for `X = sum c_j B(t_j)`: `exp(-Var(X) / 2)`.
pub fn analytic_char_fn(spec: &LinearFunctionalSpec) -> f64 {
    (-0.5 * spec.brownian_variance()).exp()
}

/// Functional of each path after reflection at the rule's stopping index.
pub(crate) fn reflected_functionals<R: StoppingRule + ?Sized>(
    grid: &TimeGrid,
    rule: &R,
    functional: &ResolvedFunctional,
    n_paths: usize,
    seed: u64,
) -> (Vec<f64>, usize) {
    let out = simulate(grid, n_paths, seed, |mut path, _| {
        let stop = evaluate_rule(rule, &path);
        reflect_in_place(&mut path, stop).expect("rule returned an index on the path");
        (functional.evaluate(path.values()), stop.index().is_some())
    });
    let stopped = out.iter().filter(|(_, s)| *s).count();
    (out.into_iter().map(|(x, _)| x).collect(), stopped)
}

pub(crate) fn char_details(est: &CharFnEstimate, target: f64) -> serde_json::Value {
    json!({
        "target": target,
        "re": est.re,
        "im": est.im,
        "se_re": est.se_re,
        "se_im": est.se_im,
        "distance": (est.re - target).hypot(est.im),
    })
}

pub(crate) fn spec_echo(spec: &LinearFunctionalSpec) -> serde_json::Value {
    json!({ "times": spec.times(), "coeffs": spec.coeffs() })
}

/// Compares the empirical characteristic function of the functional of the
/// reflected paths against the exact Gaussian value.
///
/// The statistic is the larger of `|re - target| / se_re` and `|im| / se_im`;
/// the check passes when it is at most `z`.
pub fn reflection_char_test<R: StoppingRule + ?Sized>(
    grid: &TimeGrid,
    rule: &R,
    spec: &LinearFunctionalSpec,
    n_paths: usize,
    seed: u64,
    z: f64,
) -> Result<TestReport> {
    require_paths(n_paths, MIN_CHAR_TEST_PATHS)?;
    require_z(z)?;
    let functional = spec.resolve(grid)?;
    let (samples, stopped) = reflected_functionals(grid, rule, &functional, n_paths, seed);
    let est = empirical_char_fn(&samples)?;
    let target = analytic_char_fn(spec);
    let mut details = char_details(&est, target);
    details["stopped_fraction"] = json!(stopped as f64 / n_paths as f64);
    Ok(
        TestReport::new("reflection-char", est.deviation_from(target), z, n_paths)
            .with_config(json!({
                "rule": rule.name(),
                "functional": spec_echo(spec),
                "horizon": grid.horizon(),
                "steps": grid.len() - 1,
                "n_paths": n_paths,
                "seed": seed,
                "z": z,
            }))
            .with_details(details),
    )
}

/// Two-sample KS test between the reflected functional and the functional
/// of an independent batch of unreflected paths.
pub fn reflection_two_sample_test<R: StoppingRule + ?Sized>(
    grid: &TimeGrid,
    rule: &R,
    spec: &LinearFunctionalSpec,
    n_paths: usize,
    seed: u64,
) -> Result<TestReport> {
    require_paths(n_paths, 2)?;
    let functional = spec.resolve(grid)?;
    let (reflected, _) = reflected_functionals(grid, rule, &functional, n_paths, seed);
    let fresh = simulate_streams(
        grid,
        n_paths,
        |i| StreamSpec::new(seed, i as u64).lane(1),
        |path, _| functional.evaluate(path.values()),
    );
    let d = ks_two_sample(&reflected, &fresh)?;
    Ok(
        TestReport::new("reflection-two-sample", d, ks_two_sample_threshold(n_paths, n_paths), n_paths)
            .with_config(json!({
                "rule": rule.name(),
                "functional": spec_echo(spec),
                "horizon": grid.horizon(),
                "steps": grid.len() - 1,
                "n_paths": n_paths,
                "seed": seed,
            })),
    )
}
