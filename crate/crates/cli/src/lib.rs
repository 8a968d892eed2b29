//! Experiment harness: TOML configs, seeded parallel trials, CSV output and
//! property verification.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod summary;
pub mod verify;

pub use config::{AgnosticInstance, Constants, ExperimentConfig, Grid, GridPoint, Suite};
pub use error::{HarnessError, Result};
pub use output::{read_rows, Collector, Metadata};
pub use run::{collect_rows, run_experiment, run_trial, trial_rng, ResultRow, TrialOutput};
pub use summary::{summarize, Summary};
