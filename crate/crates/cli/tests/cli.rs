//! End-to-end behaviour of the `myowalk` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use myowalk_learn::metrics::read_metrics;
use myowalk_learn::{TrainConfig, Trainer};
use tempfile::TempDir;

fn myowalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_myowalk"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// A pendulum run small enough to finish in well under a second.
fn tiny_config(dir: &Path) -> PathBuf {
    let mut c = TrainConfig::default();
    c.model = "pendulum_muscle".into();
    c.run.workers = 1;
    c.run.iterations = 3;
    c.run.checkpoint_every = 1;
    c.ppo.steps_per_iteration = 300;
    c.ppo.minibatch = 100;
    c.ppo.hidden = vec![8];
    let path = dir.join("tiny.json");
    std::fs::write(&path, c.to_json()).unwrap();
    path
}

fn train_tiny(dir: &Path, out: &str) -> PathBuf {
    let cfg = tiny_config(dir);
    let out = dir.join(out);
    let o = myowalk(&["train", "--config", p(&cfg), "--out-dir", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn unknown_preset_is_a_usage_error_listing_presets() {
    let dir = TempDir::new().unwrap();
    let o = myowalk(&["train", "--preset", "fastest", "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    for name in ["ours", "met_only", "cot_only", "no_energy", "double_stance", "activation_sq", "no_fiber_obs"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn bad_flags_exit_with_usage_code() {
    assert_eq!(myowalk(&["train"]).status.code(), Some(2));
    assert_eq!(myowalk(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn resume_with_edited_config_is_refused() {
    let dir = TempDir::new().unwrap();
    let out = train_tiny(dir.path(), "run");
    let mut cfg = TrainConfig::load(&out.join("config.json")).unwrap();
    cfg.ppo.lr *= 2.0;
    let edited = dir.path().join("edited.json");
    std::fs::write(&edited, cfg.to_json()).unwrap();
    let o = myowalk(&["train", "--config", p(&edited), "--out-dir", p(&out), "--resume"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hash"), "{}", stderr(&o));

    // Rewind to iteration 2 as if interrupted; the unedited snapshot resumes
    // and reproduces the last row.
    let ck = out.join("checkpoints");
    let full = read_metrics(&out.join("metrics.csv")).unwrap();
    std::fs::copy(ck.join("iter_000002.json"), ck.join("latest.json")).unwrap();
    let o = myowalk(&["train", "--out-dir", p(&out), "--resume"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_metrics(&out.join("metrics.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.iteration).collect::<Vec<_>>(), [1, 2, 3]);
    assert!(rows[2].same_outcome(&full[2]));
}

#[test]
fn non_empty_output_directory_needs_force() {
    let dir = TempDir::new().unwrap();
    let out = train_tiny(dir.path(), "run");
    let before = std::fs::read(out.join("metrics.csv")).unwrap();
    let cfg = tiny_config(dir.path());
    let o = myowalk(&["train", "--config", p(&cfg), "--out-dir", p(&out), "--seed", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--force"));
    assert_eq!(std::fs::read(out.join("metrics.csv")).unwrap(), before);

    let o = myowalk(&["train", "--config", p(&cfg), "--out-dir", p(&out), "--seed", "9", "--force"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_ne!(std::fs::read(out.join("metrics.csv")).unwrap(), before);
    assert_eq!(TrainConfig::load(&out.join("config.json")).unwrap().run.seed, 9);
}

#[test]
fn snapshot_alone_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let a = train_tiny(dir.path(), "a");
    let b = dir.path().join("b");
    let o = myowalk(&["train", "--config", p(&a.join("config.json")), "--out-dir", p(&b)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(a.join("config.json")).unwrap(), std::fs::read(b.join("config.json")).unwrap());
    let (ra, rb) = (read_metrics(&a.join("metrics.csv")).unwrap(), read_metrics(&b.join("metrics.csv")).unwrap());
    assert_eq!(ra.len(), 3);
    for (x, y) in ra.iter().zip(&rb) {
        assert!(x.same_outcome(y), "{x:?} vs {y:?}");
    }
}

#[test]
fn eval_refuses_mismatched_model_naming_both_dims() {
    let dir = TempDir::new().unwrap();
    let mut cfg = TrainConfig::default();
    cfg.model = "full_humanoid".into();
    cfg.run.workers = 1;
    cfg.ppo.hidden = vec![4];
    let ck = dir.path().join("humanoid.json");
    Trainer::new(cfg).unwrap().checkpoint().save(&ck).unwrap();
    let o = myowalk(&["eval", "--checkpoint", p(&ck), "--model", "biped2d", "--episodes", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("278") && msg.contains("76"), "{msg}");
}

#[test]
fn eval_zero_episodes_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let out = train_tiny(dir.path(), "run");
    let csv = dir.path().join("eval.csv");
    let ck = out.join("checkpoints/latest.json");
    let o = myowalk(&["eval", "--checkpoint", p(&ck), "--episodes", "0", "--out", p(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        "episode,return,steps,distance_m,met_mean_wpkg,cot,status\n"
    );
}

#[test]
fn deterministic_eval_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let out = train_tiny(dir.path(), "run");
    let ck = out.join("checkpoints/iter_000002.json");
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let traj = dir.path().join(format!("{name}.jsonl"));
        let o = myowalk(&[
            "eval", "--checkpoint", p(&ck), "--episodes", "3", "--seed", "5", "--deterministic", "--out", p(&csv),
            "--export-traj", p(&traj),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (std::fs::read_to_string(csv).unwrap(), std::fs::read_to_string(traj).unwrap())
    };
    let (a, ta) = run("a.csv");
    let (b, tb) = run("b.csv");
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    assert_eq!(a.lines().count(), 4);
    let steps: usize = a.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(ta.lines().count(), steps);
}

#[test]
fn energy_and_simulate_tabulate_open_loop_runs() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("energy.csv");
    let o = myowalk(&["energy", "--model", "biped2d", "--activation", "0.1", "--episodes", "2", "--out", p(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("episode,e_total_j,distance_m,met_mean_wpkg,cot,status\n"));
    assert_eq!(text.lines().count(), 3);

    let traj = dir.path().join("sim.jsonl");
    let o = myowalk(&["simulate", "--model", "biped2d", "--random", "--seed", "1", "--out", p(&traj)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&traj).unwrap().lines().count() > 0);
    let plots = dir.path().join("plots");
    let o = myowalk(&["plot", "--traj", p(&traj), "--out", p(&plots)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(plots.join("activation_heatmap.svg")).unwrap().starts_with("<svg"));
    assert!(std::fs::read_to_string(plots.join("com_path.svg")).unwrap().starts_with("<svg"));
    assert_eq!(myowalk(&["simulate", "--activation", "1.5", "--out", p(&traj)]).status.code(), Some(2));
}

#[test]
fn muscle_curves_write_both_grids() {
    let dir = TempDir::new().unwrap();
    let o = myowalk(&["muscle-curves", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fl = std::fs::read_to_string(dir.path().join("force_length.csv")).unwrap();
    let fv = std::fs::read_to_string(dir.path().join("force_velocity.csv")).unwrap();
    assert_eq!(fl.lines().count(), 162);
    assert_eq!(fv.lines().count(), 302);
    assert!(fl.lines().any(|l| l.starts_with("1.00,1.00000000,")));
    assert!(fl.lines().any(|l| l.starts_with("1.30,") && l.ends_with(",0.11920292")));
    assert!(fv.lines().any(|l| l == "0.00,1.00000000"));
}

#[test]
fn plot_matches_golden_svgs() {
    let dir = TempDir::new().unwrap();
    let o = myowalk(&["plot", "--metrics", p(&data("tiny_metrics.csv")), "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["learning_curve.svg", "met.svg", "cot.svg", "episode_length.svg"] {
        let got = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let golden = data("golden").join(name);
        if std::env::var_os("MYOWALK_UPDATE_GOLDEN").is_some() {
            std::fs::write(&golden, &got).unwrap();
        }
        let want = std::fs::read_to_string(&golden).expect("golden file present");
        assert_eq!(got, want, "{name} differs from its golden copy");
    }
}

#[test]
fn learning_curve_marks_the_stage_switch() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("m.csv");
    let mut text = String::from("iteration,stage,mean_return,max_return,mean_length,mean_met,mean_cot\n");
    for i in 1..=500 {
        let stage = if i < 300 { 1 } else { 2 };
        text.push_str(&format!("{i},{stage},{},{},{},5,2\n", i as f64 * 0.1, i as f64 * 0.2, 40 + i / 10));
    }
    std::fs::write(&csv, text).unwrap();
    let out = dir.path().join("plots");
    let o = myowalk(&["plot", "--metrics", p(&csv), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(out.join("learning_curve.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="marker""#).count(), 1);
    assert!(svg.contains("stage 2 from iteration 300"));
}

#[test]
fn plot_reports_empty_and_incomplete_metrics() {
    let dir = TempDir::new().unwrap();
    let out = p(dir.path());
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let o = myowalk(&["plot", "--metrics", p(&empty), "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no data rows"), "{}", stderr(&o));

    let header_only = dir.path().join("header.csv");
    std::fs::write(&header_only, "iteration,stage,mean_return,max_return,mean_length,mean_met,mean_cot\n").unwrap();
    let o = myowalk(&["plot", "--metrics", p(&header_only), "--out", out]);
    assert!(stderr(&o).contains("no data rows"), "{}", stderr(&o));

    let partial = dir.path().join("partial.csv");
    std::fs::write(&partial, "iteration,stage,mean_return\n1,1,3.0\n").unwrap();
    let o = myowalk(&["plot", "--metrics", p(&partial), "--out", out]);
    assert!(!o.status.success());
    let msg = stderr(&o);
    assert!(msg.contains("max_return") && msg.contains("mean_length") && msg.contains("mean_met") && msg.contains("mean_cot"), "{msg}");
    assert!(!msg.contains("mean_return,"), "{msg}");
}
