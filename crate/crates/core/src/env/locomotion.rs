use std::sync::Arc;

use nalgebra::Vector3;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::reward::{reward, RewardBreakdown, RewardInputs};
use super::{clamp_action, observe, EnvConfig, EnvError, Environment, ObsSpec, Stage, Status, StepInfo, Transition};
use crate::dynamics::contact::contact_location;
use crate::dynamics::{com_from_frames, forward_kinematics, step, Model, SimState};
use crate::metabolics::{episode_cot, metabolic_power, EnergyAccount};
use crate::model::JointType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    #[default]
    LegLiftRandom,
    DoubleStance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResetConfig {
    pub mode: ResetMode,
    /// Hip flexion range of the lifted leg (rad).
    pub lift_hip: [f64; 2],
    /// Knee flexion range of the lifted leg (rad).
    pub lift_knee: [f64; 2],
    /// Gaussian noise on every joint coordinate (rad).
    pub noise_std: f64,
    /// Initial forward speed as a fraction of `v_target`.
    pub speed_fraction: f64,
}

impl Default for ResetConfig {
    fn default() -> Self {
        Self {
            mode: ResetMode::LegLiftRandom,
            lift_hip: [0.3, 0.6],
            lift_knee: [0.4, 0.8],
            noise_std: 0.02,
            speed_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerminationConfig {
    /// Fall when pelvis height drops below this fraction of its reset height.
    pub pelvis_height_frac: f64,
    /// Fall when the torso tilts further than this from vertical (rad).
    pub max_tilt_rad: f64,
    pub horizon_s: f64,
}

impl Default for TerminationConfig {
    fn default() -> Self {
        Self {
            pelvis_height_frac: 0.6,
            max_tilt_rad: 60f64.to_radians(),
            horizon_s: 10.0,
        }
    }
}

/// Locomotion roles resolved to indices. Side 0 is left, 1 is right.
#[derive(Debug, Clone)]
pub struct Roles {
    pub torso: usize,
    pub pelvis: usize,
    pub hip: [usize; 2],
    pub knee: [usize; 2],
    /// Contact point indices on each foot.
    pub feet: [Vec<usize>; 2],
    /// Mirrored joint index pairs.
    pub mirror: Vec<(usize, usize)>,
}

impl Roles {
    pub fn resolve(model: &Model) -> Result<Self, EnvError> {
        let r = model
            .desc
            .locomotion
            .as_ref()
            .ok_or_else(|| EnvError::Config(format!("model '{}' declares no locomotion roles", model.desc.name)))?;
        let link = |n: &str| model.link_index(n).ok_or_else(|| EnvError::Config(format!("unknown link {n}")));
        let joint = |n: &str| model.joint_index(n).ok_or_else(|| EnvError::Config(format!("unknown joint {n}")));
        let dof = |d: &crate::model::DofRef| joint(&d.joint).map(|j| model.joints[j].dof_offset + d.dof);
        let feet = |names: &[String]| -> Result<Vec<usize>, EnvError> {
            let links = names.iter().map(|n| link(n)).collect::<Result<Vec<_>, _>>()?;
            Ok((0..model.contacts.len()).filter(|&c| links.contains(&model.contacts[c].link)).collect())
        };
        Ok(Self {
            torso: link(&r.torso)?,
            pelvis: link(&r.pelvis)?,
            hip: [dof(&r.left.hip)?, dof(&r.right.hip)?],
            knee: [dof(&r.left.knee)?, dof(&r.right.knee)?],
            feet: [feet(&r.left.foot_links)?, feet(&r.right.foot_links)?],
            mirror: r
                .mirror_pairs
                .iter()
                .map(|[a, b]| Ok((joint(a)?, joint(b)?)))
                .collect::<Result<_, EnvError>>()?,
        })
    }
}

fn dof_limits(model: &Model, k: usize) -> Option<[f64; 2]> {
    let j = &model.joints[model.dof_joint[k]];
    j.limits.as_ref().map(|l| l[k - j.dof_offset])
}

fn check_reset(model: &Model, roles: &Roles, cfg: &ResetConfig) -> Result<(), EnvError> {
    for (what, range, dofs) in [("lift_hip", cfg.lift_hip, roles.hip), ("lift_knee", cfg.lift_knee, roles.knee)] {
        if !(range[0] <= range[1]) {
            return Err(EnvError::Config(format!("reset.{what} range {range:?} is empty")));
        }
        for k in dofs {
            if let Some([lo, hi]) = dof_limits(model, k) {
                if range[0] < lo || range[1] > hi {
                    return Err(EnvError::Config(format!(
                        "reset.{what} {range:?} exceeds joint limits [{lo}, {hi}] of {}",
                        model.joints[model.dof_joint[k]].name
                    )));
                }
            }
        }
    }
    if !(cfg.noise_std >= 0.0) {
        return Err(EnvError::Config(format!("reset.noise_std must be ≥ 0, got {}", cfg.noise_std)));
    }
    Ok(())
}

fn sample_range(rng: &mut dyn RngCore, [lo, hi]: [f64; 2]) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Mirror image of joint coordinates across the sagittal plane: rotations
/// about x and y change sign, rotations about z do not.
fn mirror_sign(kind: JointType, i: usize) -> f64 {
    match kind {
        JointType::Ball3 if i < 2 => -1.0,
        _ => 1.0,
    }
}

/// Draws an initial state. Returns the state and which side was lifted
/// (`None` for double stance).
pub fn reset_state(
    model: &Model,
    roles: &Roles,
    cfg: &EnvConfig,
    rng: &mut dyn RngCore,
) -> Result<(SimState, Option<usize>), EnvError> {
    let rc = &cfg.reset;
    check_reset(model, roles, rc)?;
    let mut q = vec![0.0; model.ndof];
    let root = model.root();
    let joint_dofs: Vec<usize> = (0..model.ndof).filter(|&k| model.joints[model.dof_joint[k]].parent.is_some()).collect();

    let lifted = match rc.mode {
        ResetMode::LegLiftRandom => {
            let side = usize::from(!rng.random_bool(0.5));
            q[roles.hip[side]] = sample_range(rng, rc.lift_hip);
            q[roles.knee[side]] = sample_range(rng, rc.lift_knee);
            Some(side)
        }
        ResetMode::DoubleStance => None,
    };

    let noise = (rc.noise_std > 0.0).then(|| Normal::new(0.0, rc.noise_std).expect("finite std"));
    let draw = |rng: &mut dyn RngCore| noise.map_or(0.0, |n| n.sample(rng));
    if lifted.is_some() {
        for &k in &joint_dofs {
            q[k] += draw(rng);
        }
    } else {
        let mut done = vec![false; model.joints.len()];
        for &(a, b) in &roles.mirror {
            let (ja, jb) = (&model.joints[a], &model.joints[b]);
            for i in 0..ja.kind.ndof() {
                let n = draw(rng);
                q[ja.dof_offset + i] += n;
                q[jb.dof_offset + i] += n * mirror_sign(jb.kind, i);
            }
            done[a] = true;
            done[b] = true;
        }
        for (ji, j) in model.joints.iter().enumerate() {
            if j.parent.is_some() && !done[ji] {
                for i in 0..j.kind.ndof() {
                    q[j.dof_offset + i] += draw(rng);
                }
            }
        }
    }
    for k in joint_dofs {
        if let Some([lo, hi]) = dof_limits(model, k) {
            q[k] = q[k].clamp(lo, hi);
        }
    }

    // Drop the body so the lowest stance contact touches the ground.
    if root.kind.is_floating() {
        let frames = forward_kinematics(model, &q);
        let stance: Vec<usize> = match lifted {
            Some(side) => roles.feet[1 - side].clone(),
            None => roles.feet.concat(),
        };
        let lowest = stance
            .iter()
            .map(|&c| contact_location(model, &frames, c).y)
            .fold(f64::INFINITY, f64::min);
        if lowest.is_finite() {
            q[root.dof_offset + 1] -= lowest - cfg.sim.contact.ground_height;
        }
    }
    let mut qd = vec![0.0; model.ndof];
    if root.kind.is_floating() {
        qd[root.dof_offset] = rc.speed_fraction * cfg.reward.v_target;
    }
    Ok((SimState::new(model, q, qd), lifted))
}

fn up_axis(frames: &crate::dynamics::Frames, link: usize) -> Vector3<f64> {
    frames.rot[link].column(1).into_owned()
}

pub struct LocomotionEnv {
    model: Arc<Model>,
    cfg: EnvConfig,
    roles: Roles,
    spec: ObsSpec,
    state: SimState,
    energy: EnergyAccount,
    stage: Stage,
    reset_pelvis_height: f64,
    lifted: Option<usize>,
}

impl LocomotionEnv {
    pub fn new(model: Arc<Model>, cfg: EnvConfig) -> Result<Self, EnvError> {
        let roles = Roles::resolve(&model)?;
        cfg.reward.validate().map_err(EnvError::Config)?;
        check_reset(&model, &roles, &cfg.reset)?;
        let spec = ObsSpec::for_model(&model, cfg.include_fiber_lengths);
        let state = SimState::zero(&model);
        let energy = EnergyAccount::new(model.total_mass, 0.0);
        Ok(Self {
            model,
            cfg,
            roles,
            spec,
            state,
            energy,
            stage: Stage::Dense,
            reset_pelvis_height: 1.0,
            lifted: None,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn roles(&self) -> &Roles {
        &self.roles
    }

    pub fn spec(&self) -> ObsSpec {
        self.spec
    }

    pub fn energy(&self) -> &EnergyAccount {
        &self.energy
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    /// Side lifted at the last reset (0 left, 1 right).
    pub fn lifted_side(&self) -> Option<usize> {
        self.lifted
    }

    pub fn reset_pelvis_height(&self) -> f64 {
        self.reset_pelvis_height
    }

    pub fn observe(&self) -> Vec<f64> {
        observe(&self.model, &self.state, &self.spec).expect("spec built from model")
    }

    /// Starts an episode from a given state (used by tests and replays).
    pub fn reset_to(&mut self, state: SimState) -> Vec<f64> {
        let frames = forward_kinematics(&self.model, &state.q);
        self.reset_pelvis_height = frames.pos[self.roles.pelvis].y;
        self.energy = EnergyAccount::new(self.model.total_mass, com_from_frames(&self.model, &frames).x);
        self.state = state;
        self.observe()
    }

    pub fn terminated(&self) -> Status {
        let frames = forward_kinematics(&self.model, &self.state.q);
        let t = &self.cfg.termination;
        let tilt = up_axis(&frames, self.roles.torso).y.clamp(-1.0, 1.0).acos();
        if frames.pos[self.roles.pelvis].y < t.pelvis_height_frac * self.reset_pelvis_height || tilt > t.max_tilt_rad {
            Status::Fell
        } else if self.state.t >= t.horizon_s - 1e-9 {
            Status::Timeout
        } else {
            Status::Running
        }
    }

    fn abort(&self, clamped: usize) -> Transition {
        Transition {
            obs: self.observe(),
            reward: 0.0,
            breakdown: RewardBreakdown {
                stage: self.stage.number(),
                ..RewardBreakdown::default()
            },
            status: Status::Aborted,
            info: StepInfo {
                clamped,
                distance: self.energy.distance(),
                e_total: self.energy.e_total,
                met_mean: self.energy.met_mean(),
                ..StepInfo::default()
            },
        }
    }
}

impl Environment for LocomotionEnv {
    fn obs_dim(&self) -> usize {
        self.spec.obs_dim()
    }

    fn action_dim(&self) -> usize {
        self.model.n_muscles()
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        let (state, lifted) = reset_state(&self.model, &self.roles, &self.cfg, rng).expect("reset config validated in new()");
        self.lifted = lifted;
        self.reset_to(state)
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition, EnvError> {
        let n = self.model.n_muscles();
        if action.len() != n {
            return Err(EnvError::ActionLength {
                expected: n,
                got: action.len(),
            });
        }
        if action.iter().any(|a| !a.is_finite()) {
            log::warn!("non-finite action at t = {:.3} s; aborting episode", self.state.t);
            return Ok(self.abort(0));
        }
        let (a, clamped) = clamp_action(action);
        let model = Arc::clone(&self.model);
        let prev_x = self.energy.x_now;
        let e_before = self.energy.e_total;
        let dt = self.cfg.physics_dt;
        for i in 0..self.cfg.substeps {
            match step(&model, &self.cfg.sim, &self.state, &a, dt) {
                Ok(s) => self.state = s,
                Err(e) => {
                    log::warn!("simulation aborted: {e}");
                    return Ok(self.abort(clamped));
                }
            }
            let p = metabolic_power(&model, &self.state.fiber, &self.cfg.energy).expect("fiber cache sized by model");
            let x = if i + 1 == self.cfg.substeps {
                com_from_frames(&model, &forward_kinematics(&model, &self.state.q)).x
            } else {
                self.energy.x_now
            };
            self.energy.accumulate(p, dt, x);
        }

        let control_dt = self.cfg.control_dt();
        let frames = forward_kinematics(&model, &self.state.q);
        let com = com_from_frames(&model, &frames);
        let status = self.terminated();
        let up_p = up_axis(&frames, self.roles.pelvis);
        let cot = episode_cot(&self.energy, model.total_mass, -self.cfg.sim.gravity[1]).value;
        let inputs = RewardInputs {
            torso_tilt: up_axis(&frames, self.roles.torso).y.clamp(-1.0, 1.0).acos(),
            pelvis_roll: up_p.z.atan2(up_p.y),
            pelvis_pitch: up_p.x.atan2(up_p.y),
            v_com_x: (self.energy.x_now - prev_x) / control_dt,
            z_com: com.z,
            met: (self.energy.e_total - e_before) / (model.total_mass * control_dt),
            mean_sq_activation: a.iter().map(|x| x * x).sum::<f64>() / n.max(1) as f64,
            cot,
        };
        let breakdown = reward(&inputs, status, self.stage, &self.cfg.reward);
        Ok(Transition {
            obs: self.observe(),
            reward: breakdown.total,
            breakdown,
            status,
            info: StepInfo {
                clamped,
                met: inputs.met,
                distance: self.energy.distance(),
                e_total: self.energy.e_total,
                met_mean: self.energy.met_mean(),
                cot: status.is_terminal().then_some(cot),
            },
        })
    }

    fn set_stage(&mut self, stage: Stage) {
        self.stage = stage;
    }

    fn state(&self) -> &SimState {
        &self.state
    }
}
