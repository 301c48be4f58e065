//! Batch driver: TOML experiment configs in, CSV and JSON artifacts out.

pub mod config;
pub mod error;
pub mod metrics;
pub mod output;
pub mod plot;
pub mod run;

use std::path::Path;
use std::time::Instant;

pub use config::{DynamicsParams, ExperimentConfig, Mode, SpectrumParams, ZeroModeParams};
pub use error::{CliError, CliResult};
pub use output::Artifacts;

/// Loads the config, runs it and writes the artifact set into `out`.
pub fn execute(mode: Mode, config: Option<&Path>, overrides: &[String], out: &Path) -> CliResult<ExperimentConfig> {
    let cfg = ExperimentConfig::load(config, overrides, mode)?;
    let start = Instant::now();
    let art = run::run(mode, &cfg)?;
    output::write_run(out, &cfg, art, start.elapsed().as_secs_f64())?;
    Ok(cfg)
}
