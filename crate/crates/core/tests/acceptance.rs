//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use reflection_mc::cli::{mask_timing, parse_config, run};
use reflection_mc::reflection::within_ulps;
use reflection_mc::verify::{ks_threshold, running_max_samples, CertainEvent, LevelAbove, TestFunctional};
use reflection_mc::*;

const N: usize = 100_000;
const Z: f64 = 4.0;

struct Outcome {
    pass: bool,
    note: String,
}

fn outcome(pass: bool, note: impl Into<String>) -> Outcome {
    Outcome { pass, note: note.into() }
}

fn criterion_spec() -> LinearFunctionalSpec {
    LinearFunctionalSpec::new(vec![0.25, 0.5, 1.0], vec![1.0, -1.0, 1.0]).unwrap()
}

/// xorshift64* with Box-Muller; shares nothing with the library sampler.
struct OracleGaussian(u64, Option<f64>);

impl OracleGaussian {
    fn uniform(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        let r = self.0.wrapping_mul(0x2545_F491_4F6C_DD1D);
        ((r >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    fn normal(&mut self) -> f64 {
        if let Some(z) = self.1.take() {
            return z;
        }
        let (u, v) = (self.uniform(), self.uniform());
        let r = (-2.0 * u.ln()).sqrt();
        let a = 2.0 * std::f64::consts::PI * v;
        self.1 = Some(r * a.sin());
        r * a.cos()
    }
}

fn c1_reflection_char() -> Outcome {
    let grid = uniform_grid(1.0, 1024).unwrap();
    let spec = criterion_spec();
    let target = (-0.375f64).exp();

    // independent oracle on the unreflected functional
    let mut g = OracleGaussian(0x9E37_79B9_7F4A_7C15, None);
    let oracle: Vec<f64> = (0..1_000_000)
        .map(|_| {
            let b1 = 0.5 * g.normal();
            let b2 = b1 + 0.5 * g.normal();
            let b3 = b2 + 0.5f64.sqrt() * g.normal();
            b1 - b2 + b3
        })
        .collect();
    let o = empirical_char_fn(&oracle).unwrap();
    let oracle_ok = (o.re - target).abs() <= Z * o.se_re
        && (analytic_char_fn(&spec) - target).abs() < 1e-15;

    let started = Instant::now();
    let r = reflection_char_test(&grid, &first_hitting_rule(0.3), &spec, N, 20_161, Z).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let d = &r.details;
    let re = d["re"].as_f64().unwrap();
    let im = d["im"].as_f64().unwrap();
    let (se_re, se_im) = (d["se_re"].as_f64().unwrap(), d["se_im"].as_f64().unwrap());
    let pass = (re - target).abs() <= Z * se_re && im.abs() <= Z * se_im && oracle_ok && secs < 30.0;
    outcome(
        pass,
        format!(
            "re={re:.5} (target {target:.5}, |dev|={:.2e} <= {:.2e}), im={im:.2e} (<= {:.2e}), oracle re={:.5}, {secs:.1}s",
            (re - target).abs(),
            Z * se_re,
            Z * se_im,
            o.re
        ),
    )
}

fn c2_pathwise_identity() -> Outcome {
    let grid = uniform_grid(1.0, 256).unwrap();
    let mut pick = StreamSpec::new(77, 0).lane(9).open();
    let mut failures = 0;
    let mut stopped = 0;
    for i in 0..10_000u64 {
        let path = generate_path(&grid, StreamSpec::new(77, i));
        let rule = first_hitting_rule(3.0 * pick.next_uniform() - 1.5);
        let n = 1 + (pick.next_u64() % 6) as usize;
        let mut idx: Vec<usize> = (0..n).map(|_| 1 + (pick.next_u64() % 256) as usize).collect();
        idx.sort_unstable();
        idx.dedup();
        let times = idx.iter().map(|&k| grid.time(k)).collect();
        let coeffs = idx.iter().map(|_| 4.0 * pick.next_uniform() - 2.0).collect();
        let spec = LinearFunctionalSpec::new(times, coeffs).unwrap();

        let stop = evaluate_rule(&rule, &path);
        let x = linear_functional(&path, &spec).unwrap();
        let xt = linear_functional(&reflect(&path, stop).unwrap(), &spec).unwrap();
        let ok = match stop {
            StopDecision::Never => x == xt,
            StopDecision::At(s) => {
                stopped += 1;
                let yz = yz_decomposition(&path, s, &spec).unwrap();
                let scale = spec.resolve(&grid).unwrap().rounding_scale(path.values(), s);
                within_ulps(x, yz.y + yz.z, scale, 8) && within_ulps(xt, yz.y - yz.z, scale, 8)
            }
        };
        failures += usize::from(!ok);
    }
    outcome(failures == 0, format!("10000 triples ({stopped} stopped), {failures} failures"))
}

fn c3_involution_and_branches() -> Outcome {
    let grid = uniform_grid(1.0, 128).unwrap();
    let mut pick = StreamSpec::new(3, 0).lane(5).open();
    let bits = |p: &SamplePath| p.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let mut failures = 0;
    for i in 0..10_000u64 {
        let p = generate_path(&grid, StreamSpec::new(3, i));
        let s = StopDecision::At((pick.next_u64() % 129) as usize);
        let twice = reflect(&reflect(&p, s).unwrap(), s).unwrap();
        let never = reflect(&p, StopDecision::Never).unwrap();
        let at0 = reflect(&p, StopDecision::At(0)).unwrap();
        let negated: Vec<u64> = p.values().iter().map(|v| (2.0 * 0.0 - v).to_bits()).collect();
        let ok = bits(&twice) == bits(&p)
            && bits(&never) == bits(&p)
            && bits(&at0) == negated
            && at0.values().iter().zip(p.values()).all(|(a, b)| *a == -b);
        failures += usize::from(!ok);
    }
    outcome(failures == 0, format!("10000 paths, {failures} failures"))
}

fn c4_hitting_time() -> Outcome {
    let grid = uniform_grid(1.0, 1024).unwrap();
    let analytic = 2.0 * (1.0 - normal_cdf(0.5));
    let bridge = hitting_time_cdf_test(0.5, 1.0, &grid, N, 41, Mode::BridgeCorrected, Z).unwrap();
    let raw = hitting_time_cdf_test(0.5, 1.0, &grid, N, 41, Mode::Raw, Z).unwrap();
    let est = |r: &TestReport| r.details["estimate"].as_f64().unwrap();
    let se = bridge.details["se"].as_f64().unwrap();
    let raw_gap = analytic - est(&raw);
    let raw_undershoots = raw_gap > Z * se;
    let pass = bridge.passed
        && (est(&bridge) - analytic).abs() <= Z * se
        && (analytic - 0.617_075).abs() < 1e-6
        && raw_undershoots
        && raw.passed;
    outcome(
        pass,
        format!(
            "bridge={:.5} vs {analytic:.6} (|dev|={:.2e} <= {:.2e}); raw={:.5} undershoots by {raw_gap:.4}, passes with allowance {:.4}",
            est(&bridge),
            (est(&bridge) - analytic).abs(),
            Z * se,
            est(&raw),
            raw.details["bias_allowance"].as_f64().unwrap()
        ),
    )
}

fn c5_running_max() -> Outcome {
    let grid = uniform_grid(1.0, 1024).unwrap();
    let r = running_max_ks_test(1.0, &grid, N, 51, Mode::BridgeCorrected).unwrap();
    let samples = running_max_samples(&grid, 1.0, 1_000, 51, Mode::BridgeCorrected).unwrap();
    let nonneg = samples.iter().all(|&m| m >= 0.0);
    let threshold = ks_threshold(N);
    outcome(
        r.passed && r.threshold == threshold && nonneg,
        format!(
            "KS={:.5} <= {threshold:.5} (calibrated; {} the 0.006 guide value)",
            r.statistic,
            if r.statistic <= 0.006 { "also within" } else { "above" }
        ),
    )
}

fn c6_dyadic() -> Outcome {
    let grid = uniform_grid(1.0, 1024).unwrap();
    let levels = [1, 2, 3, 4, 5, 6];
    let reports =
        dyadic_convergence_study(&grid, &first_hitting_rule(0.4), &criterion_spec(), &levels, N, 61, Z).unwrap();
    let all_pass = reports.iter().all(|r| r.passed);
    let distances: Vec<f64> = reports.iter().map(|r| r.details["distance"].as_f64().unwrap()).collect();
    let noise = reports
        .iter()
        .map(|r| Z * r.details["se_re"].as_f64().unwrap().hypot(r.details["se_im"].as_f64().unwrap()))
        .fold(0.0, f64::max);
    let nonincreasing = distances.windows(2).all(|w| w[1] <= w[0] + noise);

    // exhaustive unit properties on a 1e4-point grid of t values
    let mut unit_failures = 0;
    for i in 0..10_000 {
        let t = i as f64 * 1e-3 + if i % 7 == 0 { 0.0 } else { 3.3e-5 };
        for j in 1..=8u32 {
            let cap = (1u64 << j) as f64;
            let tj = dyadic_approximation(t, j).unwrap();
            let ok = if t > cap {
                tj == cap
            } else {
                let finer = dyadic_approximation(t, j + 1).unwrap();
                t <= tj && tj < t + 1.0 / cap && finer <= tj && (tj * cap).fract() == 0.0
            };
            unit_failures += usize::from(!ok);
        }
    }
    unit_failures += usize::from(dyadic_approximation(f64::INFINITY, 3).unwrap() != 8.0);
    let stats: Vec<String> = reports.iter().map(|r| format!("{:.2}", r.statistic)).collect();
    outcome(
        all_pass && nonincreasing && unit_failures == 0,
        format!(
            "j=1..6 z-stats [{}] <= {Z}; distances nonincreasing within noise: {nonincreasing}; unit property failures: {unit_failures}",
            stats.join(", ")
        ),
    )
}

fn c7_independence() -> Outcome {
    let grid = uniform_grid(1.0, 1024).unwrap();
    let f = TestFunctional::ClampedLinear { weights: vec![1.0], lower: -1.0, upper: 1.0 };
    let event = LevelAbove { time: 0.5, level: 0.0 };
    let r = increment_independence_test(&grid, 0.5, &[1.0], &f, &event, N, 71, Z).unwrap();
    let exact = increment_independence_test(&grid, 0.5, &[1.0], &f, &CertainEvent, 1_000, 71, Z).unwrap();

    let path = generate_path(&grid, StreamSpec::new(71, 0));
    let audit = causality_audit(&PeekAtFinal, &path, StreamSpec::new(71, 1), 64).unwrap();
    let cx_ok = audit.counterexample.as_ref().is_some_and(|cx| {
        evaluate_rule(&PeekAtFinal, &cx.perturbed) != audit.original
            && cx.perturbed.values()[..=cx.cut] == path.values()[..=cx.cut]
    });
    let hit_audit = causality_audit(&first_hitting_rule(0.3), &path, StreamSpec::new(71, 2), 64).unwrap();
    outcome(
        r.passed && exact.details["difference"] == 0.0 && !audit.passed && cx_ok && hit_audit.passed,
        format!(
            "z-stat={:.3} (diff={:.2e}); anti-causal rule rejected at trial {} with counterexample ({} -> {})",
            r.statistic,
            r.details["difference"].as_f64().unwrap(),
            audit.counterexample.as_ref().map_or(0, |c| c.trial),
            audit.original,
            audit.counterexample.as_ref().map_or(StopDecision::Never, |c| c.decision),
        ),
    )
}

fn c8_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        "experiment = \"reflection-char\"\nhorizon = 1.0\nsteps = 256\npaths = 5000\nseed = 81\nrule = \"first-hit\"\nrule_level = 0.3\ntimes = [0.25, 0.5, 1.0]\ncoeffs = [1.0, -1.0, 1.0]\n",
        "experiment = \"hitting-cdf\"\nhorizon = 1.0\nsteps = 256\npaths = 5000\nseed = 82\nx = 0.5\nt = 1.0\nmode = \"bridge-corrected\"\n",
        "experiment = \"dyadic-study\"\nhorizon = 1.0\nsteps = 256\npaths = 5000\nseed = 83\nrule = \"first-hit\"\nrule_level = 0.4\ntimes = [0.5, 1.0]\ncoeffs = [1.0, 1.0]\nj_values = [1, 2, 3]\n",
        "experiment = \"causality-audit\"\nhorizon = 1.0\nsteps = 64\npaths = 20\nseed = 84\nrule = \"peek-final\"\ntrials = 16\n",
    ];
    let bin = env!("CARGO_BIN_EXE_reflection-mc");
    let mut mismatches = 0;
    for (i, text) in configs.iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.toml"));
        let report = dir.path().join(format!("r{i}.json"));
        std::fs::write(&cfg, text).unwrap();
        let first = Command::new(bin).arg("run").arg(&cfg).arg("--out").arg(&report).output().unwrap();
        assert!(matches!(first.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&first.stderr));
        let again = Command::new(bin).arg("reproduce").arg(&report).output().unwrap();
        mismatches += usize::from(again.status.code() != Some(0));

        // and in-process, from the config embedded in the report
        let original = std::fs::read_to_string(&report).unwrap();
        let v: serde_json::Value = serde_json::from_str(&original).unwrap();
        let embedded = parse_config(&serde_json::from_value::<reflection_mc::cli::ExperimentConfig>(v["config"].clone()).unwrap().to_toml()).unwrap();
        let rerun = run(&embedded).unwrap().to_json();
        mismatches += usize::from(mask_timing(&original).unwrap() != mask_timing(&rerun).unwrap());
    }
    outcome(mismatches == 0, format!("{} reports regenerated, {mismatches} mismatches", configs.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 reflection characteristic function", c1_reflection_char),
        ("2 pathwise Y/Z identity", c2_pathwise_identity),
        ("3 involution and branch exactness", c3_involution_and_branches),
        ("4 hitting-time identity", c4_hitting_time),
        ("5 running-maximum law", c5_running_max),
        ("6 dyadic convergence", c6_dyadic),
        ("7 increment independence and causality", c7_independence),
        ("8 reproducibility", c8_reproducibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let o = check();
        println!(
            "[{}] criterion {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.note,
            started.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
