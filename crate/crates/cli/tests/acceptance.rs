//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line to stderr (visible even when test output is captured).
//!
//! Run alone with `cargo test -p myowalk-cli --test acceptance`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use myowalk_cli::Preset;
use myowalk_core::dynamics::{
    forward_kinematics, kinetic_energy, link_velocities, mass_matrix, potential_energy, step, Model, SimParams, SimState,
};
use myowalk_core::env::{build_env, reset_state, EnvConfig, Environment, Roles, Stage, Status};
use myowalk_core::metabolics::{episode_cot, met_rate, metabolic_power, EnergyAccount, EnergyParams};
use myowalk_core::model::{bundled, load_model, JointType, MuscleDesc, ViaPoint};
use myowalk_core::muscle::{moment_arms, mtu_force, muscle_torques, CurveParams, MuscleState};
use myowalk_learn::eval::{evaluate, EvalOptions};
use myowalk_learn::policy::{gaussian_logp, ActorCritic};
use myowalk_learn::ppo::{gae, normalize_advantages, ppo_loss, Batch, PpoConfig};
use myowalk_learn::{StageConfig, StageController, TrainConfig, Trainer};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const MTU_ORACLE: &str = include_str!("../../core/tests/data/mtu_oracle.csv");
const BIPED_ORACLE: &str = include_str!("../../core/tests/data/biped2d_oracle.json");

fn report(n: u32, title: &str, pass: bool, detail: String, start: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n:>2} {verdict}: {title}; {detail} [{:.1} s]\n", start.elapsed().as_secs_f64());
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {n} ({title}) failed: {detail}");
}

fn model(name: &str) -> Arc<Model> {
    Arc::new(Model::new(bundled(name).unwrap()).unwrap())
}

#[test]
fn criterion_01_dimension_fidelity() {
    let t = Instant::now();
    let m = model("full_humanoid");
    let env = build_env(m.clone(), &EnvConfig::default()).unwrap();
    let link_mass: f64 = m.links.iter().map(|l| l.mass).sum();
    let got = (m.links.len(), m.ndof, m.n_muscles(), env.obs_dim(), env.action_dim());
    let pass = got == (16, 31, 120, 278, 120) && m.total_mass == 75.0 && (link_mass - 75.0).abs() < 1e-9 && t.elapsed().as_secs_f64() < 1.0;
    report(
        1,
        "full_humanoid dimensions",
        pass,
        format!("links {}, dof {}, muscles {}, obs {}, act {}, mass {} kg (links sum {link_mass})", got.0, got.1, got.2, got.3, got.4, m.total_mass),
        t,
    );
}

fn muscle_desc(f_max: f64, alpha: f64, l_opt: f64) -> MuscleDesc {
    MuscleDesc {
        name: "m".into(),
        f_max_n: f_max,
        l_opt_m: l_opt,
        l_slack_m: 0.2,
        pennation_rad: alpha,
        path: vec![
            ViaPoint { link: "a".into(), offset_m: [0.0; 3] },
            ViaPoint { link: "b".into(), offset_m: [0.0; 3] },
        ],
    }
}

#[test]
fn criterion_02_mtu_force_contract() {
    let t = Instant::now();
    let c = CurveParams::default();
    let (mut rows, mut bad, mut worst) = (0, 0, 0.0f64);
    for line in MTU_ORACLE.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let st = MuscleState { a: v[3], l_m: v[4], l_m_dot: v[5], l_mt: 0.0 };
        let f = mtu_force(&st, &muscle_desc(v[0], v[1], v[2]), &c).unwrap();
        let err = (f - v[6]).abs() / v[6].abs().max(1e-300);
        // Six significant digits: agreement to half a unit in the sixth digit.
        if (f - v[6]).abs() > 5e-7 * v[6].abs() + 1e-12 {
            bad += 1;
        }
        worst = worst.max(if v[6] == 0.0 { f.abs() } else { err });
        rows += 1;
    }
    let d = muscle_desc(1000.0, 0.2, 0.1);
    let iso = |a| MuscleState { a, l_m: 0.1, l_m_dot: 0.0, l_mt: 0.0 };
    let zero = mtu_force(&iso(0.0), &d, &c).unwrap();
    let full = mtu_force(&iso(1.0), &d, &c).unwrap();
    let exact = zero == 0.0 && full == 1000.0 * 0.2f64.cos();
    report(
        2,
        "musculotendon force vs independent script",
        rows == 10_000 && bad == 0 && exact && t.elapsed().as_secs_f64() < 10.0,
        format!("{rows} rows, {bad} outside 6 significant digits, worst relative error {worst:.2e}; boundary cases exact: {exact}"),
        t,
    );
}

fn random_biped_state(m: &Model, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut q = Vec::with_capacity(m.ndof);
    for j in &m.joints {
        if j.kind == JointType::Planar3 {
            q.extend([rng.random_range(-1.0..1.0), rng.random_range(0.8..1.4), rng.random_range(-0.5..0.5)]);
        } else {
            let [lo, hi] = j.limits.as_ref().map_or([-1.0, 1.0], |l| l[0]);
            q.push(rng.random_range(lo..hi));
        }
    }
    let qd = (0..m.ndof).map(|_| rng.random_range(-3.0..3.0)).collect();
    (q, qd)
}

#[test]
fn criterion_03_muscle_dynamics_consistency() {
    let t = Instant::now();
    let m = model("biped2d");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_power: f64 = 0.0;
    for _ in 0..1000 {
        let (q, qd) = random_biped_state(&m, &mut rng);
        let a: Vec<f64> = (0..m.n_muscles()).map(|_| rng.random()).collect();
        let frames = forward_kinematics(&m, &q);
        let vels = link_velocities(&m, &frames, &qd);
        let mut st = SimState::new(&m, q.clone(), qd.clone());
        st.refresh(&m, &a);
        let tau = muscle_torques(&m, &a, &q, &qd).unwrap();
        let joint_power: f64 = tau.iter().zip(&qd).map(|(t, v)| t * v).sum();
        let terms: Vec<f64> = m.muscles.iter().zip(&st.muscle_force).map(|(mu, f)| -f * mu.lengthening_rate(&frames, &vels)).collect();
        let muscle_power: f64 = terms.iter().sum();
        let scale = terms.iter().map(|x| x.abs()).sum::<f64>().max(1e-9);
        worst_power = worst_power.max((joint_power - muscle_power).abs() / scale);
    }

    let oracle: Value = serde_json::from_str(BIPED_ORACLE).unwrap();
    let mut worst_arm: f64 = 0.0;
    let poses = oracle["poses"].as_array().unwrap();
    for pose in poses {
        let q: Vec<f64> = pose["q"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let mut want = vec![vec![0.0; m.ndof]; m.n_muscles()];
        for e in pose["arms"].as_array().unwrap() {
            let e = e.as_array().unwrap();
            want[e[0].as_u64().unwrap() as usize][e[1].as_u64().unwrap() as usize] = e[2].as_f64().unwrap();
        }
        for (i, mu) in m.muscles.iter().enumerate() {
            let r = moment_arms(&mu.desc, &m, &q).unwrap();
            for d in 0..m.ndof {
                worst_arm = worst_arm.max((r[d] - want[i][d]).abs());
            }
        }
    }
    report(
        3,
        "power balance and moment arms",
        worst_power < 1e-6 && worst_arm < 1e-6 && poses.len() == 1000 && t.elapsed().as_secs_f64() < 30.0,
        format!("worst relative power mismatch {worst_power:.2e} over 1000 states; worst moment-arm error {worst_arm:.2e} m over {} poses", poses.len()),
        t,
    );
}

fn model_from(v: Value) -> Model {
    Model::new(load_model(&v.to_string()).unwrap()).unwrap()
}

fn gravity() -> SimParams {
    SimParams {
        gravity: [0.0, -9.81, 0.0],
        ..SimParams::default()
    }
}

fn total_energy(m: &Model, s: &SimState) -> f64 {
    let f = forward_kinematics(m, &s.q);
    let v = link_velocities(m, &f, &s.qd);
    kinetic_energy(m, &f, &v) + potential_energy(m, &f, &gravity().gravity())
}

#[test]
fn criterion_04_dynamics_sanity() {
    let t = Instant::now();
    let p = gravity();
    let pend = model_from(json!({
        "schema_version": 1, "name": "pendulum", "total_mass_kg": 1.0,
        "links": [{"name": "bob", "mass_kg": 1.0, "inertia_kgm2": 1e-9}],
        "joints": [{"name": "hinge", "type": "revolute1", "parent": "world", "child": "bob",
                    "axis": [0.0, 0.0, 1.0], "parent_offset_m": [0.0, 0.0, 0.0], "child_offset_m": [0.0, 1.0, 0.0]}]
    }));
    let dt = 1.0 / 600.0;
    let mut s = SimState::new(&pend, vec![5f64.to_radians()], vec![0.0]);
    let mut crossings = Vec::new();
    for _ in 0..6000 {
        let next = step(&pend, &p, &s, &[], dt).unwrap();
        if s.q[0] > 0.0 && next.q[0] <= 0.0 {
            crossings.push(s.t + s.q[0] / (s.q[0] - next.q[0]) * dt);
        }
        s = next;
    }
    let period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    let analytic = 2.0 * PI * (1.0 / 9.81f64).sqrt();
    let period_err = (period - analytic).abs() / analytic;

    let block = model_from(json!({
        "schema_version": 1, "name": "block", "total_mass_kg": 2.0,
        "links": [{"name": "block", "mass_kg": 2.0, "inertia_kgm2": [[0.1, 0.0, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, 0.3]]}],
        "joints": [{"name": "root", "type": "free6", "parent": "world", "child": "block",
                    "parent_offset_m": [0.0, 10.0, 0.0], "child_offset_m": [0.0, 0.0, 0.0]}]
    }));
    let mut s = SimState::zero(&block);
    for _ in 0..600 {
        s = step(&block, &p, &s, &[], dt).unwrap();
    }
    let fall_err = (s.q[1] + 4.905).abs() / 4.905;

    let dp = model_from(json!({
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
    }));
    let mut s = SimState::new(&dp, vec![1.0, -0.5], vec![0.0, 0.0]);
    let e0 = total_energy(&dp, &s);
    let swing = (e0 - total_energy(&dp, &SimState::zero(&dp))).abs();
    let mut drift: f64 = 0.0;
    for _ in 0..4800 {
        s = step(&dp, &p, &s, &[], 1.0 / 2400.0).unwrap();
        drift = drift.max((total_energy(&dp, &s) - e0).abs() / swing);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut spd_fail = 0;
    for m in [model("biped2d"), model("full_humanoid")] {
        for _ in 0..1000 {
            let q: Vec<f64> = (0..m.ndof).map(|_| rng.random_range(-PI..PI)).collect();
            let mm = mass_matrix(&m, &q);
            if (&mm - mm.transpose()).amax() > 1e-10 || mm.cholesky().is_none() {
                spd_fail += 1;
            }
        }
    }
    report(
        4,
        "dynamics sanity",
        period_err < 0.02 && fall_err < 0.01 && drift < 0.005 && spd_fail == 0 && t.elapsed().as_secs_f64() < 60.0,
        format!(
            "period error {:.3}%, free-fall error {:.4}%, double-pendulum drift {:.4}% over 2 s, {spd_fail} of 2000 mass matrices not symmetric positive definite",
            100.0 * period_err,
            100.0 * fall_err,
            100.0 * drift
        ),
        t,
    );
}

#[test]
fn criterion_05_energy_accounting() {
    let t = Instant::now();
    let m = model("full_humanoid");
    let rest: Vec<MuscleState> = m
        .muscles
        .iter()
        .map(|mu| MuscleState { l_m: mu.desc.l_opt_m, l_m_dot: 0.0, a: 0.0, l_mt: 0.0 })
        .collect();
    let basal = met_rate(metabolic_power(&m, &rest, &EnergyParams::default()).unwrap(), m.total_mass);

    let mut acc = EnergyAccount::new(75.0, 0.0);
    acc.accumulate(300.0, 1.0, 1.0);
    let cot = episode_cot(&acc, 75.0, 9.81).value;
    let cot_ok = (cot - 300.0 / (75.0 * 9.81)).abs() < 1e-9 && format!("{cot:.5}") == "0.40775";

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..3000);
        let dt = rng.random_range(1e-4..0.05);
        let powers: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5000.0)).collect();
        let mut acc = EnergyAccount::new(75.0, 0.0);
        for &p in &powers {
            acc.accumulate(p, dt, 0.0);
        }
        // Brute force: compensated summation of p·dt.
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for x in powers.iter().map(|p| p * dt) {
            let tt = s + x;
            c += if s.abs() >= x.abs() { (s - tt) + x } else { (x - tt) + s };
            s = tt;
        }
        worst = worst.max((acc.e_total - (s + c)).abs() / (s + c));
    }
    report(
        5,
        "energy accounting",
        basal == 1.2 && cot_ok && worst < 1e-12 && t.elapsed().as_secs_f64() < 5.0,
        format!("basal MET {basal} W/kg, CoT {cot:.9}, worst e_total relative error {worst:.1e} over 200 sequences"),
        t,
    );
}

fn random_episode(env: &mut dyn Environment, rng: &mut ChaCha8Rng) -> Vec<myowalk_core::env::Transition> {
    env.reset(rng);
    let n = env.action_dim();
    let mut out = Vec::new();
    loop {
        let a: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let tr = env.step(&a).unwrap();
        let done = tr.status.is_terminal();
        out.push(tr);
        if done {
            return out;
        }
    }
}

#[test]
fn criterion_06_reward_and_stage_contracts() {
    let t = Instant::now();
    let m = model("biped2d");
    let cfg = EnvConfig::default();
    let bound = cfg.reward.dense_bound();
    let mut env = build_env(m.clone(), &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut max_dense, mut dense_steps) = (0.0f64, 0);
    for _ in 0..20 {
        for tr in random_episode(env.as_mut(), &mut rng) {
            max_dense = max_dense.max(tr.reward);
            dense_steps += 1;
        }
    }
    env.set_stage(Stage::Sparse);
    let mut sparse_ok = 0;
    for _ in 0..20 {
        let ep = random_episode(env.as_mut(), &mut rng);
        let nonzero: Vec<usize> = ep
            .iter()
            .enumerate()
            .filter(|(_, tr)| tr.breakdown.r_eng != 0.0 || tr.breakdown.r_cot_terminal != 0.0)
            .map(|(i, _)| i)
            .collect();
        if nonzero == [ep.len() - 1] {
            sparse_ok += 1;
        }
    }

    let roles = Roles::resolve(&m).unwrap();
    let mut left = 0i64;
    for _ in 0..10_000 {
        if reset_state(&m, &roles, &cfg, &mut rng).unwrap().1 == Some(0) {
            left += 1;
        }
    }
    // Binomial(10⁴, ½) has σ = 50.
    let balanced = (left - 5000).abs() <= 150;

    let mut ctl = StageController::new(
        StageConfig {
            fallback_fraction: None,
            ..StageConfig::default()
        },
        1000,
    );
    let stages: Vec<Stage> = (1..=1000).map(|i| ctl.update(i, Some(42.0))).collect();
    let switches = stages.windows(2).filter(|w| w[0] != w[1]).count();
    report(
        6,
        "reward and stage contracts",
        max_dense <= bound && sparse_ok == 20 && balanced && switches == 1 && t.elapsed().as_secs_f64() < 120.0,
        format!(
            "max stage-1 reward {max_dense:.4} ≤ {bound} over {dense_steps} steps; {sparse_ok}/20 stage-2 episodes with one terminal energy term; {left}/10000 left lifts; {switches} switch (at iteration {}) on a flat history",
            ctl.switch_iteration.map_or("none".into(), |i| i.to_string())
        ),
        t,
    );
}

fn toy_batch(ac: &ActorCritic, n: usize, rng: &mut ChaCha8Rng) -> Batch {
    let obs = Array2::from_shape_fn((n, ac.obs_dim()), |_| rng.random_range(-1.0..1.0));
    let u = Array2::from_shape_fn((n, ac.act_dim()), |_| rng.random_range(-1.0..1.0));
    let logp = (0..n)
        .map(|i| {
            let mean = ac.pi.forward_one(obs.row(i).as_slice().unwrap());
            gaussian_logp(u.row(i).as_slice().unwrap(), &mean, &ac.log_std) + 0.4 * rng.random_range(-1.0..1.0)
        })
        .collect();
    let mut adv: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    normalize_advantages(&mut adv);
    let ret = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Batch { obs, u, logp, adv, ret }
}

fn max_gradient_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ac = ActorCritic::new(4, 4, &[6], -0.5, &mut rng);
    for p in &mut ac.pi.params {
        *p *= 30.0;
    }
    let cfg = PpoConfig {
        entropy_coef: 0.01,
        ..PpoConfig::default()
    };
    let (lo, hi) = (1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    let full = toy_batch(&ac, 24, &mut rng);
    let ratios = ppo_loss(&ac, &full, &cfg).ratios;
    // Samples on a clip kink have no derivative; leave them out.
    let keep: Vec<usize> = (0..full.len()).filter(|&i| (ratios[i] - lo).abs() > 1e-3 && (ratios[i] - hi).abs() > 1e-3).collect();
    let batch = full.select(&keep);
    let out = ppo_loss(&ac, &batch, &cfg);
    assert!(out.ratios.iter().any(|r| *r < lo || *r > hi));
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, fd: f64| {
        worst = worst.max((analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-6));
    };
    for k in 0..ac.pi.params.len() {
        let p = ac.pi.params[k];
        ac.pi.params[k] = p + h;
        let up = ppo_loss(&ac, &batch, &cfg).loss;
        ac.pi.params[k] = p - h;
        let down = ppo_loss(&ac, &batch, &cfg).loss;
        ac.pi.params[k] = p;
        check(out.grads.pi[k], (up - down) / (2.0 * h));
    }
    for k in 0..ac.log_std.len() {
        let p = ac.log_std[k];
        ac.log_std[k] = p + h;
        let up = ppo_loss(&ac, &batch, &cfg).loss;
        ac.log_std[k] = p - h;
        let down = ppo_loss(&ac, &batch, &cfg).loss;
        ac.log_std[k] = p;
        check(out.grads.log_std[k], (up - down) / (2.0 * h));
    }
    for k in 0..ac.v.params.len() {
        let p = ac.v.params[k];
        ac.v.params[k] = p + h;
        let up = ppo_loss(&ac, &batch, &cfg).loss;
        ac.v.params[k] = p - h;
        let down = ppo_loss(&ac, &batch, &cfg).loss;
        ac.v.params[k] = p;
        check(out.grads.v[k], (up - down) / (2.0 * h));
    }
    worst
}

#[test]
fn criterion_07_ppo_correctness() {
    let t = Instant::now();
    let grad_err = max_gradient_error();

    let (a, r) = gae(&[1.0], &[0.5, 0.4], &[false], 0.99, 0.95).unwrap();
    let t1 = a[0] == 1.0 + 0.99 * 0.4 - 0.5 && r[0] == a[0] + 0.5;
    let rewards = [0.3, -0.2, 1.1, 0.7];
    let values = [0.1, 0.5, -0.3, 0.8, 0.25];
    let (a0, _) = gae(&rewards, &values, &[false; 4], 0.97, 0.0).unwrap();
    let td = (0..4).all(|i| a0[i] == rewards[i] + 0.97 * values[i + 1] - values[i]);
    let (a1, _) = gae(&rewards, &values, &[false, false, false, true], 1.0, 1.0).unwrap();
    // λ = γ = 1 with a terminal end: advantage is the Monte Carlo return minus V.
    let mc = (0..4).all(|i| (a1[i] - (rewards[i..].iter().sum::<f64>() - values[i])).abs() < 1e-12);

    let mut cfg = TrainConfig::default();
    cfg.model = "pendulum_muscle".into();
    cfg.run.workers = 1;
    cfg.ppo.steps_per_iteration = 600;
    cfg.ppo.minibatch = 150;
    cfg.ppo.hidden = vec![16, 16];
    let run = || {
        let mut tr = Trainer::new(cfg.clone()).unwrap();
        let rows: Vec<_> = (0..4).map(|_| tr.iterate().unwrap()).collect();
        (tr.checkpoint(), rows)
    };
    let (ck_a, rows_a) = run();
    let (ck_b, rows_b) = run();
    let bitwise = ck_a == ck_b
        && rows_a.iter().zip(&rows_b).all(|(x, y)| x.same_outcome(y));
    report(
        7,
        "PPO correctness",
        grad_err < 1e-4 && t1 && td && mc && bitwise && t.elapsed().as_secs_f64() < 120.0,
        format!("max relative gradient error {grad_err:.2e}; GAE T=1 {t1}, λ=0 {td}, λ=γ=1 {mc}; two single-worker runs bitwise identical: {bitwise}"),
        t,
    );
}

/// Best mean return of a bang-bang angle controller `flex if (θ*−θ) − c·θ̇ > 0`
/// over a grid of damping gains, 100 episodes each.
fn pendulum_oracle(cfg: &EnvConfig) -> (f64, f64) {
    let m = model("pendulum_muscle");
    let mut env = build_env(m, cfg).unwrap();
    let target = cfg.hold.target_rad;
    let mut best = (f64::MIN, 0.0);
    for i in 0..=15 {
        let c = i as f64 * 0.02;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut total = 0.0;
        for _ in 0..100 {
            env.reset(&mut rng);
            loop {
                let s = env.state();
                let a = if (target - s.q[0]) - c * s.qd[0] > 0.0 { [1.0, 0.0] } else { [0.0, 1.0] };
                let tr = env.step(&a).unwrap();
                total += tr.reward;
                if tr.status.is_terminal() {
                    break;
                }
            }
        }
        if total / 100.0 > best.0 {
            best = (total / 100.0, c);
        }
    }
    best
}

#[test]
fn criterion_08_learning_smoke_test() {
    let t = Instant::now();
    let mut cfg = TrainConfig::default();
    cfg.model = "pendulum_muscle".into();
    cfg.run.iterations = 200;
    cfg.run.workers = 4;
    cfg.ppo.steps_per_iteration = 2048;
    cfg.ppo.minibatch = 512;
    cfg.ppo.epochs = 10;
    cfg.ppo.hidden = vec![64, 64];
    let (oracle, gain) = pendulum_oracle(&cfg.env);
    // Frozen when the oracle was first derived; guards against task drift.
    let oracle_frozen = (oracle - 148.2099).abs() < 1e-3;
    let bar = 0.9 * oracle;
    let mut tr = Trainer::new(cfg).unwrap();
    let mut recent = Vec::new();
    let mut reached = None;
    let mut last = 0.0;
    for _ in 0..200 {
        let row = tr.iterate().unwrap();
        recent.push(row.mean_return);
        let k = recent.len().saturating_sub(5);
        last = recent[k..].iter().sum::<f64>() / (recent.len() - k) as f64;
        if recent.len() >= 5 && last >= bar {
            reached = Some(row.iteration);
            break;
        }
    }
    report(
        8,
        "pendulum learning smoke test",
        oracle_frozen && reached.is_some() && t.elapsed().as_secs_f64() < 900.0,
        format!(
            "oracle return {oracle:.3} (damping gain {gain:.2}), bar {bar:.3}; 5-iteration mean return {last:.3}, reached at iteration {}",
            reached.map_or("never".into(), |i| i.to_string())
        ),
        t,
    );
}

/// Training budget for the locomotion trend check, scaled to a desk machine.
fn locomotion_config(preset: Preset, seed: u64) -> TrainConfig {
    let mut cfg = TrainConfig::default();
    cfg.model = "biped2d".into();
    cfg.run.iterations = 60;
    cfg.run.workers = 4;
    cfg.run.seed = seed;
    cfg.ppo.steps_per_iteration = 4096;
    cfg.ppo.minibatch = 1024;
    cfg.ppo.hidden = vec![64, 64];
    preset.apply(&mut cfg);
    cfg
}

/// Mean forward distance and fall fraction over 20 deterministic episodes of
/// the final policy.
fn final_policy_outcome(preset: Preset, seed: u64) -> (f64, f64) {
    let cfg = locomotion_config(preset, seed);
    let mut tr = Trainer::new(cfg.clone()).unwrap();
    for _ in 0..cfg.run.iterations {
        tr.iterate().unwrap();
    }
    let mut env = build_env(tr.model().clone(), &cfg.env).unwrap();
    env.set_stage(tr.stage.stage);
    let opts = EvalOptions {
        episodes: 20,
        seed: 1000 + seed,
        deterministic: true,
        normalize_obs: cfg.ppo.normalize_obs,
    };
    let eps = evaluate(env.as_mut(), &tr.policy, &tr.norm, opts, |_, _, _| {}).unwrap();
    let n = eps.len() as f64;
    let dist = eps.iter().map(|e| e.distance).sum::<f64>() / n;
    let fell = eps.iter().filter(|e| e.status == Status::Fell).count() as f64 / n;
    (dist, fell)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

#[test]
fn criterion_09_locomotion_trend() {
    let t = Instant::now();
    let mut out = Vec::new();
    for preset in [Preset::Ours, Preset::NoEnergy] {
        let runs: Vec<(f64, f64)> = (1..=3).map(|s| final_policy_outcome(preset, s)).collect();
        out.push(runs);
    }
    let med = |r: &[(f64, f64)]| median(r.iter().map(|x| x.0).collect());
    let (ours, none) = (med(&out[0]), med(&out[1]));
    let none_fell = out[1].iter().map(|x| x.1).sum::<f64>() / 3.0;
    let fmt = |r: &[(f64, f64)]| r.iter().map(|(d, f)| format!("{d:.3} m/{:.0}% fell", 100.0 * f)).collect::<Vec<_>>().join(", ");
    report(
        9,
        "locomotion trend on biped2d",
        ours > none && none_fell > 0.9,
        format!(
            "median distance ours {ours:.3} m vs no_energy {none:.3} m; no_energy fall rate {:.0}%; ours [{}], no_energy [{}]",
            100.0 * none_fell,
            fmt(&out[0]),
            fmt(&out[1])
        ),
        t,
    );
}

/// Looks up a dotted key in a JSON object.
fn lookup<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    key.split('.').try_fold(v, |v, k| v.get(k))
}

/// Dotted paths of the leaves where `a` and `b` differ.
fn diff_leaves(a: &Value, b: &Value, prefix: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, va) in x {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                match y.get(k) {
                    Some(vb) => diff_leaves(va, vb, &path, out),
                    None => out.push(path),
                }
            }
        }
        _ if a != b => out.push(prefix.to_string()),
        _ => {}
    }
}

#[test]
fn criterion_10_ablation_harness() {
    let t = Instant::now();
    let dir = tempfile::TempDir::new().unwrap();
    let mut base = TrainConfig::default();
    base.model = "biped2d".into();
    base.run.iterations = 10;
    base.run.workers = 2;
    base.run.checkpoint_every = 5;
    base.ppo.steps_per_iteration = 512;
    base.ppo.minibatch = 256;
    base.ppo.hidden = vec![32, 32];
    let base_path = dir.path().join("base.json");
    std::fs::write(&base_path, base.to_json()).unwrap();
    let base_json: Value = serde_json::from_str(&base.to_json()).unwrap();

    let mut failures = Vec::new();
    for preset in Preset::ALL {
        let out = dir.path().join(preset.name());
        let o = Command::new(env!("CARGO_BIN_EXE_myowalk"))
            .args(["train", "--config", s(&base_path), "--preset", preset.name(), "--out-dir", s(&out)])
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        if !o.status.success() {
            failures.push(format!("{} exited {:?}: {}", preset.name(), o.status.code(), String::from_utf8_lossy(&o.stderr)));
            continue;
        }
        let snap: Value = serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
        let mut keys = Vec::new();
        for line in preset.delta() {
            let (key, value) = line.split_once(" = ").unwrap();
            let want: Value = serde_json::from_str(value).unwrap();
            let got = lookup(&snap, key);
            let equal = match (got, &want) {
                (Some(Value::Number(g)), Value::Number(w)) => g.as_f64() == w.as_f64(),
                (Some(g), w) => g == w,
                (None, _) => false,
            };
            if !equal {
                failures.push(format!("{}: {key} is {got:?}, expected {want}", preset.name()));
            }
            keys.push(key.to_string());
        }
        let mut changed = Vec::new();
        diff_leaves(&snap, &base_json, "", &mut changed);
        for c in changed {
            if c != "preset" && !keys.contains(&c) {
                failures.push(format!("{}: undocumented change to {c}", preset.name()));
            }
        }
        if lookup(&snap, "preset") != Some(&Value::String(preset.name().into())) {
            failures.push(format!("{}: snapshot does not record the preset", preset.name()));
        }
        let rows = myowalk_learn::metrics::read_metrics(&out.join("metrics.csv")).unwrap();
        if rows.len() < 10 {
            failures.push(format!("{}: only {} iterations", preset.name(), rows.len()));
        }
    }
    report(
        10,
        "ablation presets",
        failures.is_empty() && t.elapsed().as_secs_f64() < 1800.0,
        if failures.is_empty() {
            "all 7 presets ran 10 iterations with exactly their documented config changes".into()
        } else {
            failures.join("; ")
        },
        t,
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
