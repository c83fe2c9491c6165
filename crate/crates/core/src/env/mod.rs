//! Training environments over the simulator.
//!
//! [`LocomotionEnv`] is the walking task: observation assembly, the six-term
//! reward with a stage-dependent energy term, fall/timeout termination and the
//! leg-lift reset. [`HoldEnv`] is a one-joint angle-holding task used as a
//! learning smoke test.

mod hold;
mod locomotion;
mod reward;

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{forward_kinematics, link_velocities, Model, SimParams, SimState};
use crate::metabolics::EnergyParams;
use crate::model::JointType;

pub use hold::{HoldConfig, HoldEnv};
pub use locomotion::{reset_state, LocomotionEnv, ResetConfig, ResetMode, Roles, TerminationConfig};
pub use reward::{reward, EnergyTerm, RewardBreakdown, RewardConfig, RewardInputs};

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("expected {expected} activations, got {got}")]
    ActionLength { expected: usize, got: usize },
    #[error("observation spec does not match model: {0}")]
    SpecMismatch(String),
    #[error("environment config: {0}")]
    Config(String),
}

/// Reward stage: dense per-step MET (1) or sparse terminal CoT (2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Stage {
    Dense,
    Sparse,
}

impl Stage {
    pub fn number(self) -> u8 {
        match self {
            Stage::Dense => 1,
            Stage::Sparse => 2,
        }
    }
}

impl From<Stage> for u8 {
    fn from(s: Stage) -> u8 {
        s.number()
    }
}

impl TryFrom<u8> for Stage {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Stage::Dense),
            2 => Ok(Stage::Sparse),
            _ => Err(format!("stage must be 1 or 2, got {v}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Fell,
    Timeout,
    /// Non-finite action or simulation blow-up.
    Aborted,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::Running
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Fell => "fell",
            Status::Timeout => "timeout",
            Status::Aborted => "aborted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObsSpec {
    pub dof: usize,
    pub n_links: usize,
    pub n_muscles: usize,
    pub include_fiber_lengths: bool,
}

impl ObsSpec {
    pub fn for_model(model: &Model, include_fiber_lengths: bool) -> Self {
        Self {
            dof: model.ndof,
            n_links: model.links.len(),
            n_muscles: model.n_muscles(),
            include_fiber_lengths,
        }
    }

    pub fn obs_dim(&self) -> usize {
        2 * self.dof + 6 * self.n_links + if self.include_fiber_lengths { self.n_muscles } else { 0 }
    }
}

/// Coordinates of a floating root that carry horizontal position: forward x
/// for a planar root, x and lateral z for a free root.
fn horizontal_root_dofs(model: &Model) -> &'static [usize] {
    match model.root().kind {
        JointType::Planar3 => &[0],
        JointType::Free6 => &[0, 2],
        _ => &[],
    }
}

/// `[q | qd | link positions | link velocities | l̃]`. The root's horizontal
/// coordinates are replaced by 0 and link x positions are taken relative to
/// the root link, so a forward translation of the whole body leaves the
/// observation unchanged.
pub fn observe(model: &Model, state: &SimState, spec: &ObsSpec) -> Result<Vec<f64>, EnvError> {
    let expect = ObsSpec::for_model(model, spec.include_fiber_lengths);
    if *spec != expect {
        return Err(EnvError::SpecMismatch(format!("spec {spec:?}, model needs {expect:?}")));
    }
    let frames = forward_kinematics(model, &state.q);
    let vels = link_velocities(model, &frames, &state.qd);
    let mut obs = Vec::with_capacity(spec.obs_dim());
    obs.extend_from_slice(&state.q);
    let root = model.root();
    let floating = root.kind.is_floating();
    for &k in horizontal_root_dofs(model) {
        obs[root.dof_offset + k] = 0.0;
    }
    obs.extend_from_slice(&state.qd);
    let x_ref = if floating { frames.pos[root.child].x } else { 0.0 };
    for p in &frames.pos {
        obs.extend_from_slice(&[p.x - x_ref, p.y, p.z]);
    }
    for v in &vels.vel {
        obs.extend_from_slice(v.as_slice());
    }
    if spec.include_fiber_lengths {
        obs.extend(model.muscles.iter().zip(&state.fiber).map(|(m, f)| f.l_m / m.desc.l_opt_m));
    }
    debug_assert_eq!(obs.len(), spec.obs_dim());
    Ok(obs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Locomotion when the model declares locomotion roles, otherwise hold.
    #[default]
    Auto,
    Locomotion,
    Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub task: TaskKind,
    pub reward: RewardConfig,
    pub reset: ResetConfig,
    pub termination: TerminationConfig,
    pub energy: EnergyParams,
    pub sim: SimParams,
    pub hold: HoldConfig,
    pub include_fiber_lengths: bool,
    /// Physics step (s).
    pub physics_dt: f64,
    /// Physics steps per control step.
    pub substeps: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            task: TaskKind::Auto,
            reward: RewardConfig::default(),
            reset: ResetConfig::default(),
            termination: TerminationConfig::default(),
            energy: EnergyParams::default(),
            sim: SimParams::default(),
            hold: HoldConfig::default(),
            include_fiber_lengths: true,
            physics_dt: 1.0 / 600.0,
            substeps: 20,
        }
    }
}

impl EnvConfig {
    pub fn control_dt(&self) -> f64 {
        self.physics_dt * self.substeps as f64
    }

    pub fn resolved_task(&self, model: &Model) -> TaskKind {
        match self.task {
            TaskKind::Auto if model.desc.locomotion.is_some() => TaskKind::Locomotion,
            TaskKind::Auto => TaskKind::Hold,
            t => t,
        }
    }
}

/// Diagnostics of one control step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepInfo {
    /// Action components moved by the [0, 1] clamp.
    pub clamped: usize,
    /// Mean MET over the control step (W/kg).
    pub met: f64,
    /// Forward COM displacement since reset (m).
    pub distance: f64,
    pub e_total: f64,
    /// Time-averaged MET since reset (W/kg).
    pub met_mean: f64,
    /// Cost of transport, set on terminal steps.
    pub cot: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub breakdown: RewardBreakdown,
    pub status: Status,
    pub info: StepInfo,
}

/// The interface the trainer drives. One instance per rollout worker.
pub trait Environment: Send {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Result<Transition, EnvError>;
    fn set_stage(&mut self, _stage: Stage) {}
    fn state(&self) -> &SimState;
}

pub fn build_env(model: Arc<Model>, cfg: &EnvConfig) -> Result<Box<dyn Environment>, EnvError> {
    if !(cfg.physics_dt > 0.0) || cfg.substeps == 0 {
        return Err(EnvError::Config("physics_dt must be > 0 and substeps ≥ 1".into()));
    }
    match cfg.resolved_task(&model) {
        TaskKind::Hold => Ok(Box::new(HoldEnv::new(model, cfg.clone())?)),
        _ => Ok(Box::new(LocomotionEnv::new(model, cfg.clone())?)),
    }
}

/// Clamps activations into [0, 1], returning the number of changed entries.
pub(crate) fn clamp_action(action: &[f64]) -> (Vec<f64>, usize) {
    let mut n = 0;
    let a = action
        .iter()
        .map(|&x| {
            let c = x.clamp(0.0, 1.0);
            if c != x {
                n += 1;
            }
            c
        })
        .collect();
    if n > 0 {
        log::debug!("clamped {n} action components into [0, 1]");
    }
    (a, n)
}
