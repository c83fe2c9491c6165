//! Penalty ground contact at link-mounted spheres, and penalty joint limits.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::kinematics::{point_jacobian, Frames, LinkVelocities};
use super::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactParams {
    /// Normal stiffness (N/m).
    pub k_p: f64,
    /// Normal damping (N·s/m); also the tangential viscous gain.
    pub k_d: f64,
    pub mu: f64,
    pub ground_height: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            k_p: 3e4,
            k_d: 300.0,
            mu: 0.9,
            ground_height: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitParams {
    /// N·m/rad beyond the limit.
    pub k_p: f64,
    pub k_d: f64,
}

impl Default for LimitParams {
    fn default() -> Self {
        Self { k_p: 200.0, k_d: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactState {
    pub active: bool,
    pub normal_n: f64,
    pub tangent_n: f64,
}

#[derive(Debug, Clone)]
pub struct ContactForces {
    pub points: Vec<ContactState>,
    /// World force on each contact point.
    pub world: Vec<Vector3<f64>>,
    pub generalized: Vec<f64>,
}

/// Lowest point of a contact sphere; the force is applied there.
pub fn contact_location(model: &Model, frames: &Frames, index: usize) -> Vector3<f64> {
    let c = &model.contacts[index];
    frames.point(Some(c.link), &c.offset) - Vector3::y() * c.radius
}

/// Spring-damper normal force along +y, clamped non-adhesive, with a
/// Coulomb-capped viscous tangential force, projected through the contact
/// point Jacobian.
pub fn contact_forces(model: &Model, frames: &Frames, vels: &LinkVelocities, params: &ContactParams) -> ContactForces {
    let n = model.contacts.len();
    let mut out = ContactForces {
        points: vec![ContactState::default(); n],
        world: vec![Vector3::zeros(); n],
        generalized: vec![0.0; model.ndof],
    };
    for (i, c) in model.contacts.iter().enumerate() {
        let x = contact_location(model, frames, i);
        let depth = params.ground_height - x.y;
        if depth <= 0.0 {
            continue;
        }
        let v = vels.point_velocity(frames, Some(c.link), &x);
        let normal = (params.k_p * depth - params.k_d * v.y).max(0.0);
        let vt = Vector3::new(v.x, 0.0, v.z);
        let speed = vt.norm();
        let tangent_mag = (params.mu * normal).min(params.k_d * speed);
        let tangent = if speed > 0.0 { -vt * (tangent_mag / speed) } else { Vector3::zeros() };
        let f = Vector3::y() * normal + tangent;
        out.points[i] = ContactState {
            active: true,
            normal_n: normal,
            tangent_n: tangent.norm(),
        };
        out.world[i] = f;
        for (k, col) in point_jacobian(model, frames, c.link, &x) {
            out.generalized[k] += col.dot(&f);
        }
    }
    out
}

/// Restoring spring-damper torque on every DOF outside its limit range.
pub fn limit_torques(model: &Model, q: &[f64], qd: &[f64], params: &LimitParams) -> Vec<f64> {
    let mut tau = vec![0.0; model.ndof];
    for j in &model.joints {
        let Some(limits) = &j.limits else { continue };
        for (i, [lo, hi]) in limits.iter().enumerate() {
            let k = j.dof_offset + i;
            if q[k] < *lo {
                tau[k] = params.k_p * (lo - q[k]) - params.k_d * qd[k];
            } else if q[k] > *hi {
                tau[k] = params.k_p * (hi - q[k]) - params.k_d * qd[k];
            }
        }
    }
    tau
}
