//! Generalized-coordinate forward dynamics with muscle actuation, penalty
//! ground contact and semi-implicit Euler integration.

pub mod contact;
pub mod inertia;
pub mod kinematics;

use nalgebra::{DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use contact::{contact_forces, limit_torques, ContactParams, ContactState, LimitParams};
pub use inertia::{bias_forces, inverse_dynamics, kinetic_energy, mass_matrix, potential_energy};
pub use kinematics::{forward_kinematics, link_velocities, retract, Frames, LinkVelocities};

use crate::model::{JointType, ModelDesc, ModelError, WORLD};
use crate::muscle::{evaluate_fibers, generalized_from_forces, CurveParams, MusclePath, MuscleState};

pub const DEFAULT_GRAVITY: [f64; 3] = [0.0, -9.81, 0.0];

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("timestep must be > 0, got {0}")]
    BadTimestep(f64),
    #[error("mass matrix is not positive definite (degenerate inertia)")]
    Singular,
    #[error("non-finite state at t = {0} s")]
    NonFinite(f64),
}

#[derive(Debug, Clone)]
pub struct Body {
    pub name: String,
    pub mass: f64,
    pub inertia: Matrix3<f64>,
}

#[derive(Debug, Clone)]
pub struct Joint {
    pub name: String,
    pub kind: JointType,
    pub parent: Option<usize>,
    pub child: usize,
    pub axis: Vector3<f64>,
    pub parent_offset: Vector3<f64>,
    pub child_offset: Vector3<f64>,
    pub dof_offset: usize,
    pub limits: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone)]
pub struct ContactPoint {
    pub link: usize,
    pub offset: Vector3<f64>,
    pub radius: f64,
}

/// A validated model compiled into index form for simulation. Immutable and
/// shareable across threads.
#[derive(Debug, Clone)]
pub struct Model {
    pub desc: ModelDesc,
    pub links: Vec<Body>,
    pub joints: Vec<Joint>,
    /// Joint indices, parents before children.
    pub order: Vec<usize>,
    /// Sorted DOFs that move each link (its own joint and all ancestors).
    pub link_dofs: Vec<Vec<usize>>,
    pub dof_joint: Vec<usize>,
    pub muscles: Vec<MusclePath>,
    /// DOFs crossed by at least one muscle.
    pub muscle_dofs: Vec<usize>,
    pub contacts: Vec<ContactPoint>,
    pub curves: CurveParams,
    pub ndof: usize,
    /// Declared body mass (kg).
    pub total_mass: f64,
    /// Sum of link masses (kg); equal to `total_mass` within validation tolerance.
    link_mass: f64,
}

impl Model {
    pub fn new(desc: ModelDesc) -> Result<Self, ModelError> {
        crate::model::validate(&desc)?;
        let link_ix = |name: &str| desc.link_index(name).expect("validated link name");
        let links: Vec<Body> = desc
            .links
            .iter()
            .map(|l| Body {
                name: l.name.clone(),
                mass: l.mass_kg,
                inertia: l.inertia_kgm2.matrix(),
            })
            .collect();

        let mut joints = Vec::with_capacity(desc.joints.len());
        let mut dof_joint = Vec::new();
        let mut offset = 0;
        for (ji, j) in desc.joints.iter().enumerate() {
            joints.push(Joint {
                name: j.name.clone(),
                kind: j.kind,
                parent: (j.parent != WORLD).then(|| link_ix(&j.parent)),
                child: link_ix(&j.child),
                axis: Vector3::from(j.axis.unwrap_or([0.0, 0.0, 1.0])),
                parent_offset: Vector3::from(j.parent_offset_m),
                child_offset: Vector3::from(j.child_offset_m),
                dof_offset: offset,
                limits: j.limits_rad.clone(),
            });
            dof_joint.extend(std::iter::repeat_n(ji, j.kind.ndof()));
            offset += j.kind.ndof();
        }
        let ndof = offset;

        let mut link_joint = vec![usize::MAX; links.len()];
        for (ji, j) in joints.iter().enumerate() {
            link_joint[j.child] = ji;
        }
        // Depth-first from the root gives a parents-first order.
        let mut order = Vec::with_capacity(joints.len());
        let mut stack: Vec<usize> = joints.iter().enumerate().filter(|(_, j)| j.parent.is_none()).map(|(i, _)| i).collect();
        while let Some(ji) = stack.pop() {
            order.push(ji);
            let child = joints[ji].child;
            stack.extend(
                joints
                    .iter()
                    .enumerate()
                    .filter(|(_, j)| j.parent == Some(child))
                    .map(|(i, _)| i)
                    .rev(),
            );
        }

        let mut link_dofs = vec![Vec::new(); links.len()];
        for (l, dofs) in link_dofs.iter_mut().enumerate() {
            let mut cur = Some(l);
            while let Some(c) = cur {
                let j = &joints[link_joint[c]];
                dofs.extend(j.dof_offset..j.dof_offset + j.kind.ndof());
                cur = j.parent;
            }
            dofs.sort_unstable();
        }

        let names: Vec<String> = links.iter().map(|b| b.name.clone()).collect();
        let muscles = desc
            .muscles
            .iter()
            .enumerate()
            .map(|(i, m)| {
                MusclePath::resolve(m, &names, &link_dofs).map_err(|e| ModelError::Invalid {
                    path: format!("muscles[{i}].path"),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut muscle_dofs: Vec<usize> = muscles.iter().flat_map(|m| m.crossed_dofs.iter().copied()).collect();
        muscle_dofs.sort_unstable();
        muscle_dofs.dedup();

        let contacts = desc
            .contact_points
            .iter()
            .map(|c| ContactPoint {
                link: link_ix(&c.link),
                offset: Vector3::from(c.offset_m),
                radius: c.radius_m,
            })
            .collect();

        Ok(Self {
            curves: desc.curves.unwrap_or_default(),
            total_mass: desc.total_mass_kg,
            link_mass: desc.link_mass_sum(),
            desc,
            links,
            joints,
            order,
            link_dofs,
            dof_joint,
            muscles,
            muscle_dofs,
            contacts,
            ndof,
        })
    }

    pub fn link_names(&self) -> Vec<String> {
        self.links.iter().map(|l| l.name.clone()).collect()
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn n_muscles(&self) -> usize {
        self.muscles.len()
    }

    /// The root joint (parent is the world).
    pub fn root(&self) -> &Joint {
        &self.joints[self.order[0]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub gravity: [f64; 3],
    pub contact: ContactParams,
    pub limits: LimitParams,
    /// First-order activation dynamics time constant (s); `None` applies
    /// commanded activations directly.
    pub activation_tau: Option<f64>,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            gravity: DEFAULT_GRAVITY,
            contact: ContactParams::default(),
            limits: LimitParams::default(),
            activation_tau: None,
        }
    }
}

impl SimParams {
    pub fn gravity(&self) -> Vector3<f64> {
        Vector3::from(self.gravity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub t: f64,
    /// Fiber state per muscle at (q, qd) and the current activation.
    pub fiber: Vec<MuscleState>,
    /// Musculotendon force per muscle (N).
    pub muscle_force: Vec<f64>,
    /// Contact state per contact point from the most recent step.
    pub contact: Vec<ContactState>,
}

impl SimState {
    /// A state at (q, qd) with all activations zero.
    pub fn new(model: &Model, q: Vec<f64>, qd: Vec<f64>) -> Self {
        assert_eq!(q.len(), model.ndof);
        assert_eq!(qd.len(), model.ndof);
        let mut s = Self {
            q,
            qd,
            t: 0.0,
            fiber: Vec::new(),
            muscle_force: Vec::new(),
            contact: vec![ContactState::default(); model.contacts.len()],
        };
        s.refresh(model, &vec![0.0; model.n_muscles()]);
        s
    }

    pub fn zero(model: &Model) -> Self {
        Self::new(model, vec![0.0; model.ndof], vec![0.0; model.ndof])
    }

    pub fn activations(&self) -> Vec<f64> {
        self.fiber.iter().map(|f| f.a).collect()
    }

    /// Recomputes the fiber cache at the current pose for `activations`.
    pub fn refresh(&mut self, model: &Model, activations: &[f64]) {
        let frames = forward_kinematics(model, &self.q);
        let vels = link_velocities(model, &frames, &self.qd);
        let (fiber, force) = evaluate_fibers(model, &frames, &vels, activations);
        self.fiber = fiber;
        self.muscle_force = force;
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qd).all(|x| x.is_finite())
    }
}

/// One semi-implicit Euler step: `q̈ = M⁻¹(τ_muscle + τ_contact + τ_limit − bias)`,
/// `q̇ ← q̇ + q̈·dt`, `q ← q ⊕ q̇·dt`. The fiber cache is refreshed at the new pose.
pub fn step(model: &Model, params: &SimParams, state: &SimState, activations: &[f64], dt: f64) -> Result<SimState, SimError> {
    if activations.len() != model.n_muscles() {
        return Err(SimError::LengthMismatch {
            what: "activations",
            expected: model.n_muscles(),
            got: activations.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(SimError::BadTimestep(dt));
    }
    let a: Vec<f64> = match params.activation_tau {
        Some(tau) if tau > 0.0 => {
            let blend = (dt / tau).min(1.0);
            state
                .fiber
                .iter()
                .zip(activations)
                .map(|(f, u)| f.a + (u - f.a) * blend)
                .collect()
        }
        _ => activations.to_vec(),
    };

    let frames = forward_kinematics(model, &state.q);
    let vels = link_velocities(model, &frames, &state.qd);
    let (_, forces) = evaluate_fibers(model, &frames, &vels, &a);
    let mut rhs = generalized_from_forces(model, &state.q, &forces);
    let contact = contact_forces(model, &frames, &vels, &params.contact);
    let limits = limit_torques(model, &state.q, &state.qd, &params.limits);
    let bias = inertia::inverse_dynamics_from_frames(model, &frames, &vels, &state.qd, &vec![0.0; model.ndof], &params.gravity());
    for k in 0..model.ndof {
        rhs[k] += contact.generalized[k] + limits[k] - bias[k];
    }
    let m = inertia::mass_matrix_from_frames(model, &frames);
    let chol = m.cholesky().ok_or(SimError::Singular)?;
    let qdd = chol.solve(&DVector::from_vec(rhs));

    let qd: Vec<f64> = state.qd.iter().zip(qdd.iter()).map(|(v, a)| v + a * dt).collect();
    let q = retract(model, &state.q, &qd, dt);
    let mut next = SimState {
        q,
        qd,
        t: state.t + dt,
        fiber: Vec::new(),
        muscle_force: Vec::new(),
        contact: contact.points,
    };
    if !next.is_finite() {
        return Err(SimError::NonFinite(next.t));
    }
    next.refresh(model, &a);
    if next.muscle_force.iter().any(|f| !f.is_finite()) {
        return Err(SimError::NonFinite(next.t));
    }
    Ok(next)
}

pub fn com_from_frames(model: &Model, frames: &Frames) -> Vector3<f64> {
    let s: Vector3<f64> = model.links.iter().zip(&frames.pos).map(|(b, p)| p * b.mass).sum();
    s / model.link_mass
}

pub fn com_velocity_from(model: &Model, vels: &LinkVelocities) -> Vector3<f64> {
    let s: Vector3<f64> = model.links.iter().zip(&vels.vel).map(|(b, v)| v * b.mass).sum();
    s / model.link_mass
}

/// Whole-body centre of mass (m).
pub fn com(model: &Model, state: &SimState) -> Vector3<f64> {
    com_from_frames(model, &forward_kinematics(model, &state.q))
}

/// Whole-body centre-of-mass velocity (m/s).
pub fn com_velocity(model: &Model, state: &SimState) -> Vector3<f64> {
    let frames = forward_kinematics(model, &state.q);
    com_velocity_from(model, &link_velocities(model, &frames, &state.qd))
}
