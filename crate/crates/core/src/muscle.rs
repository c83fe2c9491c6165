//! Hill-type musculotendon mechanics with a rigid tendon.
//!
//! Lengths are normalized by the optimal fiber length (`l̃ = l_m / l_opt`)
//! and velocities by `l_opt · v_max` (`ṽ`, shortening negative). The tendon
//! is held at its slack length, so fiber length and velocity are algebraic in
//! the musculotendon path:
//!
//! ```text
//! l_m  = (l_mt − l_slack) / cos α
//! l̇_m = l̇_mt / cos α
//! f    = f_max · cos α · (a · g_al(l̃) · g_v(ṽ) + g_p(l̃))
//! ```

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::kinematics::{forward_kinematics, link_velocities, retract, Frames, LinkVelocities};
use crate::dynamics::Model;
use crate::model::{MuscleDesc, WORLD};

/// Central-difference step for moment arms (rad, or m for translational DOF).
pub const MOMENT_ARM_STEP: f64 = 1e-5;

/// Fiber length floor, as a fraction of `l_opt`, used while simulating when a
/// pose pulls the path shorter than the tendon.
pub const MIN_FIBER_FRACTION: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum MuscleError {
    #[error("normalized fiber length must be > 0, got {0}")]
    Domain(f64),
    #[error("musculotendon length {l_mt} m does not exceed tendon slack length {l_slack} m")]
    SlackViolation { l_mt: f64, l_slack: f64 },
    #[error("unknown link \"{0}\" in muscle path")]
    UnknownLink(String),
    #[error("expected {expected} activations, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Shape parameters of the normalized force curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveParams {
    /// Width of the Gaussian active force-length curve.
    pub gamma: f64,
    /// Maximum shortening velocity in optimal lengths per second.
    pub v_max: f64,
    /// Eccentric force plateau as a multiple of isometric force.
    pub n_ecc: f64,
    /// Concentric Hill curvature.
    pub k_curv: f64,
    /// Passive exponential shape factor.
    pub k_pe: f64,
    /// Passive strain at which the passive force reaches `f_max`.
    pub eps0: f64,
}

impl Default for CurveParams {
    fn default() -> Self {
        Self {
            gamma: 0.45,
            v_max: 10.0,
            n_ecc: 1.5,
            k_curv: 0.25,
            k_pe: 4.0,
            eps0: 0.6,
        }
    }
}

impl CurveParams {
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("v_max", self.v_max),
            ("n_ecc", self.n_ecc),
            ("k_curv", self.k_curv),
            ("k_pe", self.k_pe),
            ("eps0", self.eps0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err((name, format!("must be > 0, got {v}")));
            }
        }
        if self.n_ecc <= 1.0 {
            return Err(("n_ecc", format!("must be > 1, got {}", self.n_ecc)));
        }
        Ok(())
    }

    /// Eccentric curvature giving a C¹ join with the concentric branch at ṽ = 0.
    pub fn k_curv_ecc(&self) -> f64 {
        (self.n_ecc - 1.0) * self.k_curv / (self.k_curv + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MuscleState {
    /// Fiber length (m).
    pub l_m: f64,
    /// Fiber lengthening rate (m/s).
    pub l_m_dot: f64,
    /// Activation in [0, 1].
    pub a: f64,
    /// Musculotendon path length (m).
    pub l_mt: f64,
}

/// Active force-length: `exp(−(l̃−1)²/γ)`.
pub fn g_al(l_tilde: f64, c: &CurveParams) -> Result<f64, MuscleError> {
    if !(l_tilde > 0.0) {
        return Err(MuscleError::Domain(l_tilde));
    }
    let d = l_tilde - 1.0;
    Ok((-d * d / c.gamma).exp())
}

/// Force-velocity: zero at or beyond maximum shortening, Hill hyperbola while
/// shortening, saturating towards `n_ecc` while lengthening.
pub fn g_v(v_tilde: f64, c: &CurveParams) -> f64 {
    if v_tilde <= -1.0 {
        0.0
    } else if v_tilde <= 0.0 {
        (1.0 + v_tilde) / (1.0 - v_tilde / c.k_curv)
    } else {
        c.n_ecc - (c.n_ecc - 1.0) / (1.0 + v_tilde / c.k_curv_ecc())
    }
}

/// Passive force-length; zero below optimal length, 1 at `l̃ = 1 + eps0`.
pub fn g_p(l_tilde: f64, c: &CurveParams) -> Result<f64, MuscleError> {
    if !(l_tilde > 0.0) {
        return Err(MuscleError::Domain(l_tilde));
    }
    if l_tilde <= 1.0 {
        return Ok(0.0);
    }
    Ok(((c.k_pe * (l_tilde - 1.0) / c.eps0).exp() - 1.0) / (c.k_pe.exp() - 1.0))
}

/// Rigid-tendon fiber length from the musculotendon path length.
pub fn fiber_from_path(l_mt: f64, desc: &MuscleDesc) -> Result<f64, MuscleError> {
    if l_mt <= desc.l_slack_m {
        return Err(MuscleError::SlackViolation {
            l_mt,
            l_slack: desc.l_slack_m,
        });
    }
    Ok((l_mt - desc.l_slack_m) / desc.pennation_rad.cos())
}

/// As [`fiber_from_path`], but floors the result at `MIN_FIBER_FRACTION · l_opt`
/// instead of failing. Used inside the simulator.
pub(crate) fn fiber_from_path_clamped(l_mt: f64, desc: &MuscleDesc) -> f64 {
    ((l_mt - desc.l_slack_m) / desc.pennation_rad.cos()).max(MIN_FIBER_FRACTION * desc.l_opt_m)
}

pub fn normalized_velocity(l_m_dot: f64, desc: &MuscleDesc, c: &CurveParams) -> f64 {
    l_m_dot / (desc.l_opt_m * c.v_max)
}

/// Musculotendon force (N). Always ≥ 0.
pub fn mtu_force(state: &MuscleState, desc: &MuscleDesc, curves: &CurveParams) -> Result<f64, MuscleError> {
    let l_tilde = state.l_m / desc.l_opt_m;
    let v_tilde = normalized_velocity(state.l_m_dot, desc, curves);
    let active = state.a * g_al(l_tilde, curves)? * g_v(v_tilde, curves);
    let passive = g_p(l_tilde, curves)?;
    Ok(desc.f_max_n * desc.pennation_rad.cos() * (active + passive))
}

/// Force of the active (contractile) element along the fiber, without the
/// pennation projection.
pub fn active_fiber_force(state: &MuscleState, desc: &MuscleDesc, curves: &CurveParams) -> Result<f64, MuscleError> {
    let l_tilde = state.l_m / desc.l_opt_m;
    let v_tilde = normalized_velocity(state.l_m_dot, desc, curves);
    Ok(desc.f_max_n * state.a * g_al(l_tilde, curves)? * g_v(v_tilde, curves))
}

/// A via-point resolved against a compiled model. `link == None` is the world.
#[derive(Debug, Clone)]
pub struct Anchor {
    pub link: Option<usize>,
    pub offset: Vector3<f64>,
}

/// A muscle with its via-points resolved to link indices, and the DOFs whose
/// motion changes its length: those moving some, but not all, of its anchors.
#[derive(Debug, Clone)]
pub struct MusclePath {
    pub desc: MuscleDesc,
    pub anchors: Vec<Anchor>,
    pub crossed_dofs: Vec<usize>,
}

impl MusclePath {
    pub(crate) fn resolve(desc: &MuscleDesc, model_links: &[String], link_dofs: &[Vec<usize>]) -> Result<Self, MuscleError> {
        let anchors = desc
            .path
            .iter()
            .map(|v| {
                let link = if v.link == WORLD {
                    None
                } else {
                    Some(
                        model_links
                            .iter()
                            .position(|n| *n == v.link)
                            .ok_or_else(|| MuscleError::UnknownLink(v.link.clone()))?,
                    )
                };
                Ok(Anchor {
                    link,
                    offset: Vector3::from(v.offset_m),
                })
            })
            .collect::<Result<Vec<_>, MuscleError>>()?;

        let dof_sets: Vec<&[usize]> = anchors
            .iter()
            .map(|a| a.link.map_or(&[][..], |l| link_dofs[l].as_slice()))
            .collect();
        let mut union: Vec<usize> = dof_sets.iter().flat_map(|s| s.iter().copied()).collect();
        union.sort_unstable();
        union.dedup();
        let crossed_dofs = union
            .into_iter()
            .filter(|d| !dof_sets.iter().all(|s| s.contains(d)))
            .collect();
        Ok(Self {
            desc: desc.clone(),
            anchors,
            crossed_dofs,
        })
    }

    pub fn world_points(&self, frames: &Frames) -> Vec<Vector3<f64>> {
        self.anchors.iter().map(|a| frames.point(a.link, &a.offset)).collect()
    }

    pub fn length(&self, frames: &Frames) -> f64 {
        let mut total = 0.0;
        let mut prev = frames.point(self.anchors[0].link, &self.anchors[0].offset);
        for a in &self.anchors[1..] {
            let p = frames.point(a.link, &a.offset);
            total += (p - prev).norm();
            prev = p;
        }
        total
    }

    /// Rate of change of the path length from anchor point velocities.
    pub fn lengthening_rate(&self, frames: &Frames, vels: &LinkVelocities) -> f64 {
        let pts = self.world_points(frames);
        let v: Vec<Vector3<f64>> = self
            .anchors
            .iter()
            .zip(&pts)
            .map(|(a, p)| vels.point_velocity(frames, a.link, p))
            .collect();
        (0..pts.len() - 1)
            .map(|i| {
                let d = pts[i + 1] - pts[i];
                let n = d.norm();
                if n > 0.0 {
                    d.dot(&(v[i + 1] - v[i])) / n
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Polyline length over the world-space via-points (m).
pub fn path_length(desc: &MuscleDesc, model: &Model, frames: &Frames) -> Result<f64, MuscleError> {
    let path = MusclePath::resolve(desc, &model.link_names(), &model.link_dofs)?;
    Ok(path.length(frames))
}

fn fd_arm(path: &MusclePath, model: &Model, q: &[f64], dof: usize) -> f64 {
    let mut dir = vec![0.0; model.ndof];
    dir[dof] = 1.0;
    let plus = forward_kinematics(model, &retract(model, q, &dir, MOMENT_ARM_STEP));
    let minus = forward_kinematics(model, &retract(model, q, &dir, -MOMENT_ARM_STEP));
    -(path.length(&plus) - path.length(&minus)) / (2.0 * MOMENT_ARM_STEP)
}

/// Moment arms `r_j = −∂l_mt/∂q_j` by central differences, where the
/// derivative is taken along generalized velocity direction j (for ball and
/// free rotations, a body-frame rotation increment). Entries for DOFs the
/// path does not cross are exactly zero.
pub fn moment_arms(desc: &MuscleDesc, model: &Model, q: &[f64]) -> Result<Vec<f64>, MuscleError> {
    let path = MusclePath::resolve(desc, &model.link_names(), &model.link_dofs)?;
    let mut r = vec![0.0; model.ndof];
    for &d in &path.crossed_dofs {
        r[d] = fd_arm(&path, model, q, d);
    }
    Ok(r)
}

/// Moment arms of every muscle, sparse over crossed DOFs. Shares one pair of
/// perturbed kinematics per DOF across all muscles crossing it.
pub fn moment_arm_table(model: &Model, q: &[f64]) -> Vec<Vec<(usize, f64)>> {
    let mut table: Vec<Vec<(usize, f64)>> = model.muscles.iter().map(|m| Vec::with_capacity(m.crossed_dofs.len())).collect();
    let mut dir = vec![0.0; model.ndof];
    for &dof in &model.muscle_dofs {
        dir[dof] = 1.0;
        let plus = forward_kinematics(model, &retract(model, q, &dir, MOMENT_ARM_STEP));
        let minus = forward_kinematics(model, &retract(model, q, &dir, -MOMENT_ARM_STEP));
        dir[dof] = 0.0;
        for (m, row) in model.muscles.iter().zip(table.iter_mut()) {
            if m.crossed_dofs.contains(&dof) {
                row.push((dof, -(m.length(&plus) - m.length(&minus)) / (2.0 * MOMENT_ARM_STEP)));
            }
        }
    }
    table
}

/// Fiber states and tendon forces of every muscle at the given kinematic
/// state and activations.
pub(crate) fn evaluate_fibers(
    model: &Model,
    frames: &Frames,
    vels: &LinkVelocities,
    activations: &[f64],
) -> (Vec<MuscleState>, Vec<f64>) {
    let mut states = Vec::with_capacity(model.muscles.len());
    let mut forces = Vec::with_capacity(model.muscles.len());
    for (m, &a) in model.muscles.iter().zip(activations) {
        let d = &m.desc;
        let l_mt = m.length(frames);
        let l_m = fiber_from_path_clamped(l_mt, d);
        let l_m_dot = m.lengthening_rate(frames, vels) / d.pennation_rad.cos();
        let st = MuscleState { l_m, l_m_dot, a, l_mt };
        let f = mtu_force(&st, d, &model.curves).expect("clamped fiber length is positive");
        states.push(st);
        forces.push(f);
    }
    (states, forces)
}

/// Generalized muscle forces `τ = Σ_i r_i(q) · f_i` at the state's pose and
/// velocity, with `activations` applied directly.
pub fn muscle_torques(model: &Model, activations: &[f64], q: &[f64], qd: &[f64]) -> Result<Vec<f64>, MuscleError> {
    if activations.len() != model.muscles.len() {
        return Err(MuscleError::LengthMismatch {
            expected: model.muscles.len(),
            got: activations.len(),
        });
    }
    let frames = forward_kinematics(model, q);
    let vels = link_velocities(model, &frames, qd);
    let (_, forces) = evaluate_fibers(model, &frames, &vels, activations);
    Ok(generalized_from_forces(model, q, &forces))
}

pub(crate) fn generalized_from_forces(model: &Model, q: &[f64], forces: &[f64]) -> Vec<f64> {
    let mut tau = vec![0.0; model.ndof];
    for (row, &f) in moment_arm_table(model, q).iter().zip(forces) {
        for &(d, r) in row {
            tau[d] += r * f;
        }
    }
    tau
}
