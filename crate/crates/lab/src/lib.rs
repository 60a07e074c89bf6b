//! Experiment runner for `qlimit`: config parsing, trial scheduling and
//! CSV/JSON result files.

pub mod config;
pub mod error;
pub mod record;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, Format};
pub use error::LabError;
pub use record::ExperimentRecord;
pub use run::run_experiment;

use std::path::Path;

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Config {
        field: "path".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    ExperimentConfig::parse(&text)
}
