//! Building blocks of the `myowalk` command: ablation presets, muscle-curve
//! tables, trajectory records and SVG plots.

use std::path::PathBuf;

use myowalk_core::env::EnvError;
use myowalk_core::model::ModelError;
use myowalk_learn::LearnError;
use thiserror::Error;

pub mod curves;
pub mod plot;
pub mod presets;
pub mod traj;

pub use presets::Preset;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown preset '{0}' (valid presets: {list})", list = presets::Preset::names().join(", "))]
    UnknownPreset(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: missing column(s): {}", names.join(", "))]
    MissingColumns { path: PathBuf, names: Vec<String> },
    #[error("{path}: {what}")]
    NoData { path: PathBuf, what: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        CliError::Csv { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        CliError::Json { path: path.into(), source }
    }

    /// 2 for usage and configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::UnknownPreset(_) | CliError::Usage(_) | CliError::Model(_) | CliError::Json { .. } => 2,
            CliError::Env(EnvError::Config(_)) => 2,
            CliError::Learn(
                LearnError::Config(_)
                | LearnError::Model(_)
                | LearnError::Json { .. }
                | LearnError::HashMismatch { .. }
                | LearnError::DimMismatch { .. }
                | LearnError::Format { .. }
                | LearnError::Env(EnvError::Config(_)),
            ) => 2,
            _ => 1,
        }
    }
}
