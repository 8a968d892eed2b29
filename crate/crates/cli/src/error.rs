use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("grid point {grid_index} trial {trial} (seed {seed}): {source}")]
    Trial {
        grid_index: usize,
        trial: usize,
        seed: u64,
        #[source]
        source: ondemand_core::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("no rows to summarize")]
    NoRows,
}

pub type Result<T> = std::result::Result<T, HarnessError>;
