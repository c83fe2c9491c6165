//! Per-step trajectory records written as JSON lines, the hand-off format for
//! external visualization.

use std::io::BufRead;
use std::path::Path;

use myowalk_core::dynamics::{com, Model};
use myowalk_core::env::{Environment, Transition};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajRecord {
    pub episode: usize,
    pub step: usize,
    /// Simulation time (s).
    pub t: f64,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    /// Whole-body centre of mass (m).
    pub com: [f64; 3],
    pub activations: Vec<f64>,
    pub reward: f64,
    /// MET over the step (W/kg).
    pub met: f64,
    pub status: String,
}

impl TrajRecord {
    pub fn capture(model: &Model, env: &dyn Environment, episode: usize, step: usize, tr: &Transition) -> Self {
        let s = env.state();
        let c = com(model, s);
        Self {
            episode,
            step,
            t: s.t,
            q: s.q.clone(),
            qd: s.qd.clone(),
            com: [c.x, c.y, c.z],
            activations: s.activations(),
            reward: tr.reward,
            met: tr.info.met,
            status: tr.status.as_str().to_string(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

pub fn read_traj(path: &Path) -> Result<Vec<TrajRecord>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CliError::json(path, e))?);
    }
    Ok(out)
}
