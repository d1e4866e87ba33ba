//! Experiment runner for `irep-core`: JSON configuration, the six
//! verification experiments, report writers and the `irep` CLI.
//!
//! ```no_run
//! use irep::{config::ExperimentConfig, experiments::run_all};
//!
//! let cfg = ExperimentConfig::from_path("configs/default.json".as_ref())?;
//! let summary = run_all(&cfg, "out".as_ref())?;
//! assert!(summary.passed);
//! # Ok::<(), irep::Error>(())
//! ```

pub mod classifier;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use experiments::{run_all, run_experiment, Experiment, Summary};

pub const THREADS_ENV: &str = "IREP_THREADS";

/// Caps the rayon pool at `IREP_THREADS` when set. Results never depend on
/// the thread count.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {value:?}"
            ))
        })?;
    // a pool that is already built keeps its size
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}
