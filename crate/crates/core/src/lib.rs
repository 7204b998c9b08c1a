//! Reflection of standard Brownian motion at stopping times.
//!
//! Paths are simulated on discrete grids from counter-based random streams,
//! stopped by causal rules, reflected about the stopped value, and checked
//! against the exact laws of standard Brownian motion.
//!
//! ```
//! use reflection_mc::{first_hitting_rule, reflection_char_test, uniform_grid, LinearFunctionalSpec};
//!
//! let grid = uniform_grid(1.0, 64).unwrap();
//! let spec = LinearFunctionalSpec::new(vec![0.5, 1.0], vec![1.0, -1.0]).unwrap();
//! let report = reflection_char_test(&grid, &first_hitting_rule(0.3), &spec, 2_000, 7, 4.0).unwrap();
//! assert!(report.passed);
//! ```

// NaN-rejecting `!(x > 0.0)` checks are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod path;
pub mod reflection;
pub mod rng;
pub mod stopping;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{uniform_grid, TimeGrid};
pub use path::{generate_path, generate_path_from, SamplePath, VALUE_QUANTUM};
pub use reflection::{
    linear_functional, reflect, reflect_in_place, yz_decomposition, LinearFunctionalSpec,
    ResolvedFunctional, YZPair,
};
pub use rng::{normal_quantile, standard_normal, RandomStream, StreamSpec};
pub use stopping::{
    causality_audit, dyadic_approximation, evaluate_rule, first_hitting_rule, AuditReport,
    DyadicRounded, FirstHitting, FixedTime, NeverStop, PeekAtFinal, StopDecision, StopImmediately,
    StoppingRule,
};
pub use verify::{
    analytic_char_fn, dyadic_convergence_study, empirical_char_fn, hitting_time_cdf_test,
    increment_independence_test, ks_statistic, normal_cdf, reflection_char_test,
    running_max_ks_test, CharFnEstimate, Mode, TestReport,
};
