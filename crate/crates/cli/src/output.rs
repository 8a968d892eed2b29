//! CSV, sidecar metadata and trace files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::run::{ResultRow, TrialOutput};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Contents of `<out>.meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub config_hash: String,
    pub rows: usize,
    pub config: ExperimentConfig,
}

pub fn metadata_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.csv")
}

pub fn trace_dir(out: &Path) -> PathBuf {
    out.with_extension("trace")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(io_err(dir)),
        _ => Ok(()),
    }
}

/// Writes rows as they arrive, flushing after each one.
pub struct Collector {
    out: PathBuf,
    csv: csv::Writer<File>,
    trace: Option<PathBuf>,
    rows: usize,
}

impl Collector {
    pub fn create(out: &Path, trace: bool) -> Result<Self> {
        create_parent(out)?;
        let file = File::create(out).map_err(io_err(out))?;
        let trace = if trace {
            let dir = trace_dir(out);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            Some(dir)
        } else {
            None
        };
        Ok(Collector {
            out: out.to_path_buf(),
            csv: csv::Writer::from_writer(file),
            trace,
            rows: 0,
        })
    }

    pub fn push(&mut self, output: TrialOutput) -> Result<()> {
        if let (Some(dir), Some(trace)) = (&self.trace, &output.trace) {
            let path = dir.join(format!("g{:04}_t{:05}.json", output.row.grid_index, output.row.trial));
            let file = File::create(&path).map_err(io_err(&path))?;
            serde_json::to_writer(BufWriter::new(file), trace)?;
        }
        self.csv.serialize(&output.row)?;
        self.csv.flush().map_err(io_err(&self.out))?;
        self.rows += 1;
        Ok(())
    }

    /// Flushes the CSV and writes the sidecar metadata.
    pub fn finish(mut self, cfg: &ExperimentConfig) -> Result<Metadata> {
        self.csv.flush().map_err(io_err(&self.out))?;
        let meta = Metadata {
            version: VERSION.to_string(),
            config_hash: cfg.hash(),
            rows: self.rows,
            config: cfg.clone(),
        };
        let path = metadata_path(&self.out);
        let mut file = File::create(&path).map_err(io_err(&path))?;
        serde_json::to_writer_pretty(&mut file, &meta)?;
        writeln!(file).map_err(io_err(&path))?;
        Ok(meta)
    }
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(io_err(path))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(Into::into)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
