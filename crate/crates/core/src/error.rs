use thiserror::Error;

/// Errors raised by path generation, stopping, reflection and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time grid is empty")]
    EmptyGrid,
    #[error("time grid must start at 0, got {0}")]
    GridNotAnchored(f64),
    #[error("time grid is not strictly increasing at index {index}: {prev} >= {next}")]
    GridNotIncreasing { index: usize, prev: f64, next: f64 },
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("number of steps must be at least 1")]
    ZeroSteps,
    #[error("path has {values} values but grid has {times} times")]
    PathLengthMismatch { values: usize, times: usize },
    #[error("path must start at 0, got {0}")]
    PathNotAnchored(f64),
    #[error("index {index} is out of range for a grid of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("time {0} is not a point of the grid")]
    TimeNotOnGrid(f64),
    #[error("invalid linear functional: {0}")]
    InvalidFunctional(String),
    #[error("dyadic approximation needs a nonnegative time, got {0}")]
    NegativeTime(f64),
    #[error("dyadic level must be at least 1, got {0}")]
    InvalidDyadicLevel(u32),
    #[error("grid does not resolve dyadic level {level}: time {time} is missing")]
    GridTooCoarse { level: u32, time: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("event `{0}` failed the causality audit")]
    AntiCausalEvent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
