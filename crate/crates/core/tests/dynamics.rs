use std::f64::consts::PI;

use myowalk_core::dynamics::{
    self, bias_forces, com, com_velocity, contact_forces, forward_kinematics, inverse_dynamics, kinetic_energy,
    link_velocities, mass_matrix, potential_energy, step, ContactParams, Model, SimParams, SimState,
};
use myowalk_core::model::{bundled, load_model};
use nalgebra::{DVector, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const G: [f64; 3] = [0.0, -9.81, 0.0];

fn model_from(v: serde_json::Value) -> Model {
    Model::new(load_model(&v.to_string()).unwrap()).unwrap()
}

fn params(gravity: [f64; 3]) -> SimParams {
    SimParams {
        gravity,
        ..SimParams::default()
    }
}

/// Near-point mass of `m` hanging `l` below a world hinge about z.
fn pendulum(m: f64, l: f64) -> Model {
    model_from(json!({
        "schema_version": 1, "name": "pendulum", "total_mass_kg": m,
        "links": [{"name": "bob", "mass_kg": m, "inertia_kgm2": 1e-9}],
        "joints": [{"name": "hinge", "type": "revolute1", "parent": "world", "child": "bob",
                    "axis": [0.0, 0.0, 1.0], "parent_offset_m": [0.0, 0.0, 0.0], "child_offset_m": [0.0, l, 0.0]}]
    }))
}

fn double_pendulum() -> Model {
    model_from(json!({
        "schema_version": 1, "name": "double", "total_mass_kg": 3.0,
        "links": [
            {"name": "upper", "mass_kg": 1.0, "inertia_kgm2": [[0.02, 0.0, 0.0], [0.0, 0.001, 0.0], [0.0, 0.0, 0.02]]},
            {"name": "lower", "mass_kg": 2.0, "inertia_kgm2": [[0.03, 0.0, 0.0], [0.0, 0.002, 0.0], [0.0, 0.0, 0.03]]}
        ],
        "joints": [
            {"name": "j1", "type": "revolute1", "parent": "world", "child": "upper", "axis": [0.0, 0.0, 1.0],
             "parent_offset_m": [0.0, 0.0, 0.0], "child_offset_m": [0.0, 0.2, 0.0]},
            {"name": "j2", "type": "revolute1", "parent": "upper", "child": "lower", "axis": [0.0, 0.0, 1.0],
             "parent_offset_m": [0.0, -0.2, 0.0], "child_offset_m": [0.0, 0.25, 0.0]}
        ]
    }))
}

fn free_body() -> Model {
    model_from(json!({
        "schema_version": 1, "name": "block", "total_mass_kg": 2.0,
        "links": [{"name": "block", "mass_kg": 2.0, "inertia_kgm2": [[0.1, 0.0, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, 0.3]]}],
        "joints": [{"name": "root", "type": "free6", "parent": "world", "child": "block",
                    "parent_offset_m": [0.0, 10.0, 0.0], "child_offset_m": [0.0, 0.0, 0.0]}]
    }))
}

fn biped() -> Model {
    Model::new(bundled("biped2d").unwrap()).unwrap()
}

fn humanoid() -> Model {
    Model::new(bundled("full_humanoid").unwrap()).unwrap()
}

fn random_q(model: &Model, rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    (0..model.ndof).map(|_| rng.random_range(-scale..scale)).collect()
}

fn total_energy(model: &Model, s: &SimState) -> f64 {
    let f = forward_kinematics(model, &s.q);
    let v = link_velocities(model, &f, &s.qd);
    kinetic_energy(model, &f, &v) + potential_energy(model, &f, &Vector3::from(G))
}

#[test]
fn zero_pose_is_reference_placement() {
    let m = pendulum(1.0, 0.5);
    let f = forward_kinematics(&m, &[0.0]);
    assert_eq!(f.pos[0], Vector3::new(0.0, -0.5, 0.0));
    let f = forward_kinematics(&m, &[PI / 2.0]);
    assert!((f.pos[0] - Vector3::new(0.5, 0.0, 0.0)).norm() < 1e-12);
}

#[test]
fn free_body_mass_matrix_is_block_diagonal() {
    let m = free_body();
    let mm = mass_matrix(&m, &[0.0; 6]);
    let expect = [2.0, 2.0, 2.0, 0.1, 0.2, 0.3];
    for r in 0..6 {
        for c in 0..6 {
            let e = if r == c { expect[r] } else { 0.0 };
            assert!((mm[(r, c)] - e).abs() < 1e-12, "M[{r},{c}] = {}", mm[(r, c)]);
        }
    }
}

#[test]
fn pendulum_mass_and_gravity_torque() {
    let (mass, l) = (1.5, 0.8);
    let m = pendulum(mass, l);
    let mm = mass_matrix(&m, &[0.3]);
    assert!((mm[(0, 0)] - mass * l * l).abs() < 1e-8);
    let theta: f64 = 0.7;
    let b = bias_forces(&m, &[theta], &[0.0], &Vector3::from(G));
    assert!((b[0] - mass * 9.81 * l * theta.sin()).abs() < 1e-9);
    assert_eq!(bias_forces(&m, &[theta], &[0.0], &Vector3::zeros())[0], 0.0);
}

#[test]
fn pendulum_small_oscillation_period() {
    let l = 1.0;
    let m = pendulum(1.0, l);
    let p = params(G);
    let dt = 1.0 / 600.0;
    let mut s = SimState::new(&m, vec![5f64.to_radians()], vec![0.0]);
    // Period from successive downward zero crossings of q.
    let mut crossings = Vec::new();
    for _ in 0..(10.0 / dt) as usize {
        let next = step(&m, &p, &s, &[], dt).unwrap();
        if s.q[0] > 0.0 && next.q[0] <= 0.0 {
            let frac = s.q[0] / (s.q[0] - next.q[0]);
            crossings.push(s.t + frac * dt);
        }
        s = next;
    }
    let period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    let analytic = 2.0 * PI * (l / 9.81f64).sqrt();
    assert!((period - analytic).abs() / analytic < 0.02, "period {period} vs {analytic}");
}

#[test]
fn free_fall_one_second() {
    let m = free_body();
    let p = params(G);
    let dt = 1.0 / 600.0;
    let mut s = SimState::zero(&m);
    for _ in 0..600 {
        s = step(&m, &p, &s, &[], dt).unwrap();
    }
    let dy = s.q[1];
    assert!((dy + 4.905).abs() / 4.905 < 0.01, "dy = {dy}");
}

#[test]
fn equilibrium_without_gravity() {
    let m = biped();
    let p = params([0.0; 3]);
    let s = SimState::new(&m, vec![0.0, 2.0, 0.0, 0.1, 0.2, 0.1, 0.2, -0.1, -0.1], vec![0.0; m.ndof]);
    // Muscles may be passively stretched; use a pose where none are.
    let passive: f64 = s.muscle_force.iter().sum();
    let next = step(&m, &p, &s, &vec![0.0; m.n_muscles()], 1.0 / 600.0).unwrap();
    if passive == 0.0 {
        assert_eq!(next.q, s.q);
        assert_eq!(next.qd, s.qd);
    }
    assert_eq!(next.t, 1.0 / 600.0);
    let pend = pendulum(1.0, 1.0);
    let s = SimState::zero(&pend);
    let next = step(&pend, &params([0.0; 3]), &s, &[], 0.01).unwrap();
    assert_eq!((next.q, next.qd), (s.q, s.qd));
}

#[test]
fn double_pendulum_energy_drift() {
    let m = double_pendulum();
    let p = params(G);
    let dt = 1.0 / 2400.0;
    let mut s = SimState::new(&m, vec![1.0, -0.5], vec![0.0, 0.0]);
    let e0 = total_energy(&m, &s);
    let mut worst: f64 = 0.0;
    for _ in 0..4800 {
        s = step(&m, &p, &s, &[], dt).unwrap();
        worst = worst.max((total_energy(&m, &s) - e0).abs());
    }
    // Reference the drift to the energy swing available to the motion.
    let bottom = SimState::zero(&m);
    let scale = (e0 - total_energy(&m, &bottom)).abs();
    assert!(worst / scale < 0.005, "drift {} of {}", worst, scale);
}

#[test]
fn inverse_dynamics_matches_mass_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = Vector3::from(G);
    for model in [biped(), humanoid()] {
        for _ in 0..50 {
            let q = random_q(&model, &mut rng, 1.0);
            let qd = random_q(&model, &mut rng, 2.0);
            let qdd = random_q(&model, &mut rng, 5.0);
            let tau = inverse_dynamics(&model, &q, &qd, &qdd, &g);
            let bias = bias_forces(&model, &q, &qd, &g);
            let mq = mass_matrix(&model, &q) * DVector::from_column_slice(&qdd);
            let scale = tau.iter().map(|x| x.abs()).fold(1.0, f64::max);
            for k in 0..model.ndof {
                assert!((tau[k] - bias[k] - mq[k]).abs() < 1e-8 * scale, "dof {k}: {} vs {}", tau[k] - bias[k], mq[k]);
            }
        }
    }
}

/// At rest the generalized gravity load is the gradient of potential energy,
/// taken along the coordinate retraction (tangent space for rotation vectors).
#[test]
fn gravity_load_is_potential_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = Vector3::from(G);
    for model in [biped(), humanoid()] {
        for _ in 0..20 {
            let q = random_q(&model, &mut rng, 1.0);
            let b = bias_forces(&model, &q, &vec![0.0; model.ndof], &g);
            let h = 1e-6;
            for k in 0..model.ndof {
                let mut dir = vec![0.0; model.ndof];
                dir[k] = 1.0;
                let pe = |s: f64| potential_energy(&model, &forward_kinematics(&model, &dynamics::retract(&model, &q, &dir, s)), &g);
                let fd = (pe(h) - pe(-h)) / (2.0 * h);
                assert!((b[k] - fd).abs() < 1e-6 * (1.0 + fd.abs()), "dof {k}: {} vs {fd}", b[k]);
            }
        }
    }
}

#[test]
fn mass_matrix_symmetric_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for model in [biped(), humanoid()] {
        for _ in 0..1000 {
            let q = random_q(&model, &mut rng, PI);
            let m = mass_matrix(&model, &q);
            assert!((&m - m.transpose()).amax() < 1e-10);
            assert!(m.cholesky().is_some());
        }
    }
}

#[test]
fn com_of_two_masses_and_moving_body() {
    let m = model_from(json!({
        "schema_version": 1, "name": "pair", "total_mass_kg": 2.0,
        "links": [{"name": "a", "mass_kg": 1.0, "inertia_kgm2": 0.01}, {"name": "b", "mass_kg": 1.0, "inertia_kgm2": 0.01}],
        "joints": [
            {"name": "root", "type": "free6", "parent": "world", "child": "a", "parent_offset_m": [0.0, 0.0, 0.0], "child_offset_m": [0.0, 0.0, 0.0]},
            {"name": "weld", "type": "revolute1", "parent": "a", "child": "b", "axis": [0.0, 1.0, 0.0],
             "parent_offset_m": [2.0, 0.0, 0.0], "child_offset_m": [0.0, 0.0, 0.0]}
        ]
    }));
    let s = SimState::zero(&m);
    assert!((com(&m, &s).x - 1.0).abs() < 1e-15);
    let b = free_body();
    let s = SimState::new(&b, vec![0.0; 6], vec![1.2, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(com_velocity(&b, &s), Vector3::new(1.2, 0.0, 0.0));
}

#[test]
fn com_velocity_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let model = biped();
    for _ in 0..100 {
        let q = random_q(&model, &mut rng, 1.0);
        let qd = random_q(&model, &mut rng, 2.0);
        let s = SimState::new(&model, q.clone(), qd.clone());
        let h = 1e-6;
        let ahead = SimState::new(&model, dynamics::retract(&model, &q, &qd, h), qd.clone());
        let fd = (com(&model, &ahead) - com(&model, &s)) / h;
        assert!((fd - com_velocity(&model, &s)).norm() < 1e-4);
    }
}

#[test]
fn static_penetration_normal_force() {
    let m = model_from(json!({
        "schema_version": 1, "name": "ball", "total_mass_kg": 1.0,
        "links": [{"name": "ball", "mass_kg": 1.0, "inertia_kgm2": 0.001}],
        "joints": [{"name": "root", "type": "free6", "parent": "world", "child": "ball",
                    "parent_offset_m": [0.0, 0.049, 0.0], "child_offset_m": [0.0, 0.0, 0.0]}],
        "contact_points": [{"link": "ball", "offset_m": [0.0, 0.0, 0.0], "radius_m": 0.05}]
    }));
    let params = ContactParams::default();
    let f = forward_kinematics(&m, &[0.0; 6]);
    let v = link_velocities(&m, &f, &[0.0; 6]);
    let c = contact_forces(&m, &f, &v, &params);
    assert!((c.points[0].normal_n - 30.0).abs() < 1e-9);
    assert!((c.generalized[1] - 30.0).abs() < 1e-9);
    // Separating fast: clamped, never adhesive.
    let v = link_velocities(&m, &f, &[0.0, 5.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(contact_forces(&m, &f, &v, &params).points[0].normal_n, 0.0);
    // Above ground: nothing.
    let f = forward_kinematics(&m, &[0.0, 0.1, 0.0, 0.0, 0.0, 0.0]);
    let v = link_velocities(&m, &f, &[0.0; 6]);
    assert!(!contact_forces(&m, &f, &v, &params).points[0].active);
}

#[test]
fn biped_random_activation_rollout_is_stable_and_deterministic() {
    let model = biped();
    let p = SimParams::default();
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut s = SimState::zero(&model);
        let mut traj = Vec::new();
        for _ in 0..60 {
            let a: Vec<f64> = (0..model.n_muscles()).map(|_| rng.random::<f64>()).collect();
            for _ in 0..20 {
                s = step(&model, &p, &s, &a, 1.0 / 600.0).unwrap();
                assert!(s.contact.iter().all(|c| c.normal_n >= 0.0));
            }
            traj.push(s.clone());
        }
        traj
    };
    let a = run();
    assert!(a.iter().all(|s| s.is_finite()));
    assert_eq!(a, run());
}

#[test]
fn step_rejects_bad_input() {
    let model = biped();
    let s = SimState::zero(&model);
    let p = SimParams::default();
    assert!(step(&model, &p, &s, &[0.0; 3], 1e-3).is_err());
    assert!(step(&model, &p, &s, &vec![0.0; 16], 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contact_normals_never_negative(h in -0.1f64..0.05, vy in -5.0f64..5.0, vx in -3.0f64..3.0) {
        let model = biped();
        let mut q = vec![0.0; model.ndof];
        q[1] = h;
        let mut qd = vec![0.0; model.ndof];
        qd[0] = vx;
        qd[1] = vy;
        let f = forward_kinematics(&model, &q);
        let v = link_velocities(&model, &f, &qd);
        let c = contact_forces(&model, &f, &v, &ContactParams::default());
        for pt in &c.points {
            prop_assert!(pt.normal_n >= 0.0);
            prop_assert!(pt.tangent_n <= 0.9 * pt.normal_n + 1e-12);
        }
    }
}
