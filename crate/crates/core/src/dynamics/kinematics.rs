//! World-frame forward kinematics over the joint tree.
//!
//! Every link frame sits at the link COM. A joint places its child by
//! `R_c = R_p · R_J(q)` and `p_c = p_p + R_p (parent_offset + t(q)) − R_c child_offset`.
//!
//! Generalized velocities per joint type:
//! - `revolute1`: angle rate about the axis
//! - `ball3`: child angular velocity relative to the parent, in child axes
//! - `planar3`: (ẋ, ẏ) in parent axes, then rate about parent z
//! - `free6`: linear velocity of the joint centre in parent axes, then angular
//!   velocity in child axes
//!
//! Rotational coordinates of ball and free joints are rotation vectors and are
//! advanced with [`retract`], never by adding velocities to them.

use nalgebra::{Matrix3, Rotation3, Vector3};

use super::Model;
use crate::model::JointType;

/// Link poses plus, per DOF, the world motion it induces: angular axis `w`
/// and the linear velocity `u` it gives the joint centre.
#[derive(Debug, Clone)]
pub struct Frames {
    pub rot: Vec<Matrix3<f64>>,
    pub pos: Vec<Vector3<f64>>,
    pub joint_origin: Vec<Vector3<f64>>,
    pub dof_w: Vec<Vector3<f64>>,
    pub dof_u: Vec<Vector3<f64>>,
}

impl Frames {
    /// World position of a point given in link coordinates (`None` = world).
    pub fn point(&self, link: Option<usize>, offset: &Vector3<f64>) -> Vector3<f64> {
        match link {
            Some(l) => self.pos[l] + self.rot[l] * offset,
            None => *offset,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinkVelocities {
    pub omega: Vec<Vector3<f64>>,
    /// COM linear velocity.
    pub vel: Vec<Vector3<f64>>,
}

impl LinkVelocities {
    pub fn point_velocity(&self, frames: &Frames, link: Option<usize>, world_point: &Vector3<f64>) -> Vector3<f64> {
        match link {
            Some(l) => self.vel[l] + self.omega[l].cross(&(world_point - frames.pos[l])),
            None => Vector3::zeros(),
        }
    }
}

pub(crate) fn joint_local(kind: JointType, axis: &Vector3<f64>, q: &[f64]) -> (Matrix3<f64>, Vector3<f64>) {
    match kind {
        JointType::Revolute1 => (
            Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(*axis), q[0]).into_inner(),
            Vector3::zeros(),
        ),
        JointType::Ball3 => (Rotation3::new(Vector3::new(q[0], q[1], q[2])).into_inner(), Vector3::zeros()),
        JointType::Planar3 => (
            Rotation3::from_axis_angle(&Vector3::z_axis(), q[2]).into_inner(),
            Vector3::new(q[0], q[1], 0.0),
        ),
        JointType::Free6 => (
            Rotation3::new(Vector3::new(q[3], q[4], q[5])).into_inner(),
            Vector3::new(q[0], q[1], q[2]),
        ),
    }
}

pub fn forward_kinematics(model: &Model, q: &[f64]) -> Frames {
    assert_eq!(q.len(), model.ndof, "q has wrong length");
    let nl = model.links.len();
    let mut f = Frames {
        rot: vec![Matrix3::identity(); nl],
        pos: vec![Vector3::zeros(); nl],
        joint_origin: vec![Vector3::zeros(); model.joints.len()],
        dof_w: vec![Vector3::zeros(); model.ndof],
        dof_u: vec![Vector3::zeros(); model.ndof],
    };
    for &ji in &model.order {
        let j = &model.joints[ji];
        let (rp, pp) = match j.parent {
            Some(p) => (f.rot[p], f.pos[p]),
            None => (Matrix3::identity(), Vector3::zeros()),
        };
        let qs = &q[j.dof_offset..j.dof_offset + j.kind.ndof()];
        let (rj, t) = joint_local(j.kind, &j.axis, qs);
        let rc = rp * rj;
        let origin = pp + rp * (j.parent_offset + t);
        f.rot[j.child] = rc;
        f.pos[j.child] = origin - rc * j.child_offset;
        f.joint_origin[ji] = origin;
        let o = j.dof_offset;
        match j.kind {
            JointType::Revolute1 => f.dof_w[o] = rp * j.axis,
            JointType::Ball3 => {
                for i in 0..3 {
                    f.dof_w[o + i] = rc.column(i).into_owned();
                }
            }
            JointType::Planar3 => {
                f.dof_u[o] = rp.column(0).into_owned();
                f.dof_u[o + 1] = rp.column(1).into_owned();
                f.dof_w[o + 2] = rp.column(2).into_owned();
            }
            JointType::Free6 => {
                for i in 0..3 {
                    f.dof_u[o + i] = rp.column(i).into_owned();
                    f.dof_w[o + 3 + i] = rc.column(i).into_owned();
                }
            }
        }
    }
    f
}

pub fn link_velocities(model: &Model, frames: &Frames, qd: &[f64]) -> LinkVelocities {
    assert_eq!(qd.len(), model.ndof, "qd has wrong length");
    let nl = model.links.len();
    let mut v = LinkVelocities {
        omega: vec![Vector3::zeros(); nl],
        vel: vec![Vector3::zeros(); nl],
    };
    for &ji in &model.order {
        let j = &model.joints[ji];
        let (wp, vp, pp) = match j.parent {
            Some(p) => (v.omega[p], v.vel[p], frames.pos[p]),
            None => (Vector3::zeros(), Vector3::zeros(), Vector3::zeros()),
        };
        let origin = frames.joint_origin[ji];
        let mut wc = wp;
        let mut vo = vp + wp.cross(&(origin - pp));
        for k in j.dof_offset..j.dof_offset + j.kind.ndof() {
            wc += frames.dof_w[k] * qd[k];
            vo += frames.dof_u[k] * qd[k];
        }
        v.omega[j.child] = wc;
        v.vel[j.child] = vo + wc.cross(&(frames.pos[j.child] - origin));
    }
    v
}

/// Advances coordinates along generalized velocity `v` for time `h`
/// (`q ⊕ h·v`). Additive for revolute and planar coordinates and for free-joint
/// translation; body-frame exponential update for rotation vectors.
pub fn retract(model: &Model, q: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let mut out = q.to_vec();
    for j in &model.joints {
        let o = j.dof_offset;
        let rot_at = match j.kind {
            JointType::Revolute1 | JointType::Planar3 => {
                for k in o..o + j.kind.ndof() {
                    out[k] += h * v[k];
                }
                None
            }
            JointType::Ball3 => Some(o),
            JointType::Free6 => {
                for k in o..o + 3 {
                    out[k] += h * v[k];
                }
                Some(o + 3)
            }
        };
        if let Some(r) = rot_at {
            let omega = Vector3::new(v[r], v[r + 1], v[r + 2]) * h;
            if omega == Vector3::zeros() {
                continue;
            }
            let cur = Rotation3::new(Vector3::new(q[r], q[r + 1], q[r + 2]));
            let next = (cur * Rotation3::new(omega)).scaled_axis();
            out[r..r + 3].copy_from_slice(next.as_slice());
        }
    }
    out
}

/// 3×ndof translational Jacobian columns of a world point fixed to `link`,
/// returned sparse over the DOFs that move the link.
pub fn point_jacobian(model: &Model, frames: &Frames, link: usize, world_point: &Vector3<f64>) -> Vec<(usize, Vector3<f64>)> {
    model.link_dofs[link]
        .iter()
        .map(|&k| {
            let o = frames.joint_origin[model.dof_joint[k]];
            (k, frames.dof_u[k] + frames.dof_w[k].cross(&(world_point - o)))
        })
        .collect()
}

/// Angular Jacobian columns of `link`.
pub fn angular_jacobian(model: &Model, frames: &Frames, link: usize) -> Vec<(usize, Vector3<f64>)> {
    model.link_dofs[link].iter().map(|&k| (k, frames.dof_w[k])).collect()
}
