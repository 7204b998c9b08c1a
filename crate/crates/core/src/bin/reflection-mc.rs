use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use reflection_mc::cli::{
    mask_timing, parse_config, run, ExperimentConfig, OutputFormat, RunError, RunReport, EXIT_FAIL,
    EXIT_PASS, EXIT_USAGE, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "reflection-mc", version, about = "Monte Carlo checks of Brownian reflection at stopping times")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of paths.
        #[arg(long)]
        paths: Option<usize>,
        /// Report file (default: `$REFLECTION_MC_OUT_DIR/<experiment>-seed<seed>.<ext>`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Re-run the config embedded in a JSON report and compare the results.
    Reproduce {
        report: PathBuf,
        /// Where to write the regenerated report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn default_out(config: &ExperimentConfig) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
    let ext = match config.format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    };
    dir.join(format!("{}-seed{}.{ext}", config.experiment.as_str(), config.seed))
}

fn execute(config: &ExperimentConfig) -> Result<RunReport, ExitCode> {
    run(config).map_err(|e| match e {
        RunError::Config(e) => usage(format_args!("config: {e}")),
        RunError::Verify(e) => usage(e),
    })
}

fn write(path: &Path, text: &str) -> Result<(), ExitCode> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| usage(format_args!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| usage(format_args!("{}: {e}", path.display())))
}

fn summary(report: &RunReport, out: &Path) {
    let stat = report.statistic.map_or_else(|| "inf".to_owned(), |s| format!("{s:.6}"));
    println!(
        "{}: statistic={stat} threshold={:.6} n={} {} -> {}",
        report.experiment,
        report.threshold,
        report.n,
        if report.pass { "PASS" } else { "FAIL" },
        out.display()
    );
}

fn status(pass: bool) -> ExitCode {
    ExitCode::from(if pass { EXIT_PASS } else { EXIT_FAIL } as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, paths, out, format } => (|| {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| usage(format_args!("{}: {e}", config.display())))?;
            let mut cfg = parse_config(&text).map_err(|e| usage(format_args!("{}: {e}", config.display())))?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(paths) = paths {
                cfg.paths = paths;
            }
            if let Some(format) = format {
                cfg.format = match format {
                    Format::Json => OutputFormat::Json,
                    Format::Csv => OutputFormat::Csv,
                };
            }
            let report = execute(&cfg)?;
            let out = out.unwrap_or_else(|| default_out(&cfg));
            write(&out, &report.render(cfg.format))?;
            summary(&report, &out);
            Ok(status(report.pass))
        })(),
        Command::Reproduce { report, out } => (|| {
            let original = std::fs::read_to_string(&report)
                .map_err(|e| usage(format_args!("{}: {e}", report.display())))?;
            let parsed: RunReport = serde_json::from_str(&original)
                .map_err(|e| usage(format_args!("{}: not a JSON report: {e}", report.display())))?;
            let again = execute(&parsed.config)?;
            let text = again.to_json();
            if let Some(out) = &out {
                write(out, &text)?;
            }
            let same = mask_timing(&original).ok() == mask_timing(&text).ok();
            println!(
                "{}: {}",
                report.display(),
                if same { "reproduced (identical outside timing fields)" } else { "MISMATCH" }
            );
            Ok(status(same))
        })(),
    };
    result.unwrap_or_else(|code| code)
}
