//! Seeded experiment runner behind the `specinv` binary.
//!
//! A run expands the configured suite into a fixed registry of checks,
//! executes them in registry order and collects one [`report::Record`] per
//! check plus any tabular series the checks produce.

pub mod config;
pub mod error;
pub mod report;
pub mod suites;

use std::collections::BTreeMap;

pub use config::{Suite, SuiteConfig};
pub use error::CliError;
pub use report::{Record, Report, Series, Status};

/// Environment variable capping the worker thread count.
pub const THREADS_VAR: &str = "SPECINV_THREADS";

/// Runs every check of the configured suite.
pub fn run(config: &SuiteConfig) -> Result<Report, CliError> {
    config.validate()?;
    let mut records = Vec::new();
    let mut series = BTreeMap::new();
    for suite in config.suite.expand() {
        let out = suites::run_suite(suite, config);
        records.extend(out.records);
        series.extend(out.series);
    }
    Ok(Report { version: env!("CARGO_PKG_VERSION").to_string(), seed: config.seed, config: config.clone(), records, series })
}

/// Sizes the global rayon pool from `SPECINV_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("`{THREADS_VAR}` must be a positive integer, got `{value}`")))?;
    // A second initialization in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
