//! Config-driven experiment runner behind the `reflection-mc` binary.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind, OutputFormat};
pub use report::{mask_timing, RunReport};
pub use runner::{run, RunError};

/// Environment variable naming the default directory for report files.
pub const OUT_DIR_ENV: &str = "REFLECTION_MC_OUT_DIR";

/// Exit status for a passing run.
pub const EXIT_PASS: i32 = 0;
/// Exit status for a completed run whose check failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for unusable input.
pub const EXIT_USAGE: i32 = 2;
