//! Experiment runner around `asmlab-core`: configuration, random sampling,
//! result files and the report merger behind the `asmlab` binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod report;
pub mod sampling;

use std::fs;

use asmlab_core::operator::Tolerance;

use crate::config::ExperimentConfig;
use crate::error::AppError;
use crate::experiments::Outcome;

/// Run one experiment and, when `cfg.output` is set, write `<prefix>.csv`
/// and `<prefix>.json`. Nothing is written if the run errors.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, AppError> {
    let outcome = experiments::run(cfg)?;
    if let Some(prefix) = &cfg.output {
        let json = outcome.to_json(cfg, &Tolerance::default());
        let text = serde_json::to_string_pretty(&json).expect("result JSON serializes");
        if let Some(dir) = std::path::Path::new(prefix)
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
        {
            fs::create_dir_all(dir)?;
        }
        fs::write(format!("{prefix}.csv"), outcome.report.to_csv())?;
        fs::write(format!("{prefix}.json"), text + "\n")?;
    }
    Ok(outcome)
}
