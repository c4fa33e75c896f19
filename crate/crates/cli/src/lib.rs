//! Batch driver for the contact reduced-order models: offline builds,
//! validation sweeps, convex-hull studies and report comparison.

pub mod compare;
pub mod config;
mod error;
pub mod run;

pub use compare::{compare_tables, Comparison, Thresholds, Tolerances};
pub use config::{DesignSpec, Problem, RunConfig, Settings, Stage};
pub use error::{CliError, CliResult, EXIT_ACCEPTANCE, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use run::{run, RunOutcome};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "CONTACTROM_THREADS";

/// Size the global worker pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot set up {n} worker threads: {e}")))
}
