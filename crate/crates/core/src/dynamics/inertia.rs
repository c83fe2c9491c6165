//! Joint-space inertia (composite rigid bodies) and inverse dynamics
//! (recursive Newton-Euler), both in world-frame coordinates.

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector3, Vector6};

use super::kinematics::{forward_kinematics, link_velocities, Frames, LinkVelocities};
use super::Model;
use crate::model::JointType;

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn world_inertia(model: &Model, frames: &Frames, link: usize) -> Matrix3<f64> {
    let r = frames.rot[link];
    r * model.links[link].inertia * r.transpose()
}

/// Spatial inertia about the world origin, ordered (angular, linear).
fn spatial_inertia(model: &Model, frames: &Frames, link: usize) -> Matrix6<f64> {
    let m = model.links[link].mass;
    let c = skew(&frames.pos[link]);
    let ic = world_inertia(model, frames, link);
    let mut out = Matrix6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&(ic + c.transpose() * c * m));
    out.fixed_view_mut::<3, 3>(0, 3).copy_from(&(c * m));
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&(c.transpose() * m));
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&(Matrix3::identity() * m));
    out
}

/// Spatial motion of DOF k: (w, velocity of the point at the world origin).
fn dof_motion(model: &Model, frames: &Frames, k: usize) -> Vector6<f64> {
    let w = frames.dof_w[k];
    let o = frames.joint_origin[model.dof_joint[k]];
    let v0 = frames.dof_u[k] + o.cross(&w);
    Vector6::new(w.x, w.y, w.z, v0.x, v0.y, v0.z)
}

/// Joint-space mass matrix by the composite-rigid-body algorithm.
pub fn mass_matrix_from_frames(model: &Model, frames: &Frames) -> DMatrix<f64> {
    let n = model.ndof;
    let mut composite: Vec<Matrix6<f64>> = (0..model.links.len()).map(|l| spatial_inertia(model, frames, l)).collect();
    for &ji in model.order.iter().rev() {
        let j = &model.joints[ji];
        if let Some(p) = j.parent {
            let c = composite[j.child];
            composite[p] += c;
        }
    }
    let motions: Vec<Vector6<f64>> = (0..n).map(|k| dof_motion(model, frames, k)).collect();
    let mut m = DMatrix::zeros(n, n);
    for j in &model.joints {
        let ic = &composite[j.child];
        for l in j.dof_offset..j.dof_offset + j.kind.ndof() {
            let force = ic * motions[l];
            // link_dofs of the child lists this joint's DOFs and every ancestor DOF.
            for &k in &model.link_dofs[j.child] {
                let v = motions[k].dot(&force);
                m[(k, l)] = v;
                m[(l, k)] = v;
            }
        }
    }
    m
}

pub fn mass_matrix(model: &Model, q: &[f64]) -> DMatrix<f64> {
    mass_matrix_from_frames(model, &forward_kinematics(model, q))
}

/// Generalized force required to realize `qdd` at (q, qd) under `gravity`.
pub fn inverse_dynamics_from_frames(
    model: &Model,
    frames: &Frames,
    vels: &LinkVelocities,
    qd: &[f64],
    qdd: &[f64],
    gravity: &Vector3<f64>,
) -> Vec<f64> {
    let nl = model.links.len();
    let mut alpha = vec![Vector3::zeros(); nl];
    let mut acc = vec![Vector3::zeros(); nl];
    for &ji in &model.order {
        let j = &model.joints[ji];
        let (wp, ap, accp, pp) = match j.parent {
            Some(p) => (vels.omega[p], alpha[p], acc[p], frames.pos[p]),
            None => (Vector3::zeros(), Vector3::zeros(), Vector3::zeros(), Vector3::zeros()),
        };
        let wc = vels.omega[j.child];
        let origin = frames.joint_origin[ji];
        let r = origin - pp;
        let mut ac = ap;
        let mut trans_vel = Vector3::zeros();
        let mut trans_acc = Vector3::zeros();
        for (i, k) in (j.dof_offset..j.dof_offset + j.kind.ndof()).enumerate() {
            let w = frames.dof_w[k];
            let u = frames.dof_u[k];
            // Axes fixed in the child frame rotate with ω_c; the rest with ω_p.
            let child_fixed = match j.kind {
                JointType::Ball3 => true,
                JointType::Free6 => i >= 3,
                _ => false,
            };
            let spin = if child_fixed { wc } else { wp };
            ac += w * qdd[k] + spin.cross(&w) * qd[k];
            trans_vel += u * qd[k];
            trans_acc += u * qdd[k];
        }
        let a_origin = accp + ap.cross(&r) + wp.cross(&wp.cross(&r)) + wp.cross(&trans_vel) * 2.0 + trans_acc;
        let s = frames.pos[j.child] - origin;
        alpha[j.child] = ac;
        acc[j.child] = a_origin + ac.cross(&s) + wc.cross(&wc.cross(&s));
    }

    let mut tau = vec![0.0; model.ndof];
    for l in 0..nl {
        let iw = world_inertia(model, frames, l);
        let w = vels.omega[l];
        let force = (acc[l] - gravity) * model.links[l].mass;
        let moment = iw * alpha[l] + w.cross(&(iw * w));
        for &k in &model.link_dofs[l] {
            let o = frames.joint_origin[model.dof_joint[k]];
            let jv = frames.dof_u[k] + frames.dof_w[k].cross(&(frames.pos[l] - o));
            tau[k] += jv.dot(&force) + frames.dof_w[k].dot(&moment);
        }
    }
    tau
}

pub fn inverse_dynamics(model: &Model, q: &[f64], qd: &[f64], qdd: &[f64], gravity: &Vector3<f64>) -> Vec<f64> {
    let frames = forward_kinematics(model, q);
    let vels = link_velocities(model, &frames, qd);
    inverse_dynamics_from_frames(model, &frames, &vels, qd, qdd, gravity)
}

/// Coriolis, centrifugal and gravity terms: `M(q)·q̈ + bias = τ`.
pub fn bias_forces(model: &Model, q: &[f64], qd: &[f64], gravity: &Vector3<f64>) -> Vec<f64> {
    inverse_dynamics(model, q, qd, &vec![0.0; model.ndof], gravity)
}

pub fn kinetic_energy(model: &Model, frames: &Frames, vels: &LinkVelocities) -> f64 {
    (0..model.links.len())
        .map(|l| {
            let iw = world_inertia(model, frames, l);
            let w = vels.omega[l];
            0.5 * model.links[l].mass * vels.vel[l].norm_squared() + 0.5 * w.dot(&(iw * w))
        })
        .sum()
}

pub fn potential_energy(model: &Model, frames: &Frames, gravity: &Vector3<f64>) -> f64 {
    (0..model.links.len())
        .map(|l| -model.links[l].mass * gravity.dot(&frames.pos[l]))
        .sum()
}
