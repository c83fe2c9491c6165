//! Per-iteration training metrics and their CSV file.

use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::LearnError;

/// One row of `metrics.csv`. Means are over episodes finished in the
/// iteration and are NaN when none finished; `mean_cot` averages only
/// episodes with a defined CoT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: u64,
    pub stage: u8,
    pub episodes: usize,
    pub mean_return: f64,
    pub max_return: f64,
    pub mean_length: f64,
    pub mean_distance: f64,
    pub mean_met: f64,
    pub mean_cot: f64,
    pub fell_frac: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_frac: f64,
    pub aborted: usize,
    /// Samples kept for the update.
    pub steps: usize,
    /// Whether the update was rejected for a non-finite loss.
    pub rejected: bool,
    pub wall_clock_s: f64,
}

impl IterationMetrics {
    /// Equality ignoring wall-clock time, for determinism checks.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |m: &Self| {
            let mut m = m.clone();
            m.wall_clock_s = 0.0;
            serde_json::to_string(&m).expect("metrics serialize")
        };
        strip(self) == strip(other)
    }
}

pub struct MetricsWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl MetricsWriter {
    /// Creates the file with a header, replacing any previous content.
    pub fn create(path: &Path) -> Result<Self, LearnError> {
        let file = File::create(path).map_err(|e| LearnError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            inner: csv::Writer::from_writer(file),
        })
    }

    /// Keeps the rows up to and including `iteration` and appends after them.
    pub fn resume(path: &Path, iteration: u64) -> Result<Self, LearnError> {
        let kept: Vec<_> = if path.exists() {
            read_metrics(path)?.into_iter().filter(|m| m.iteration <= iteration).collect()
        } else {
            Vec::new()
        };
        let mut w = Self::create(path)?;
        for m in &kept {
            w.write(m)?;
        }
        Ok(w)
    }

    pub fn write(&mut self, m: &IterationMetrics) -> Result<(), LearnError> {
        self.inner.serialize(m).map_err(|e| LearnError::csv(&self.path, e))?;
        self.inner.flush().map_err(|e| LearnError::io(&self.path, e))
    }
}

pub fn read_metrics(path: &Path) -> Result<Vec<IterationMetrics>, LearnError> {
    let file = OpenOptions::new().read(true).open(path).map_err(|e| LearnError::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| LearnError::csv(path, e))
}
