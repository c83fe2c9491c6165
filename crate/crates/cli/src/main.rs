//! `myowalk`: train, evaluate and inspect muscle-driven walking policies.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use myowalk_cli::plot;
use myowalk_cli::traj::{read_traj, TrajRecord};
use myowalk_cli::{curves, CliError, Preset};
use myowalk_core::dynamics::Model;
use myowalk_core::env::{build_env, Environment, Stage};
use myowalk_core::model::resolve_model;
use myowalk_core::muscle::CurveParams;
use myowalk_learn::checkpoint::Checkpoint;
use myowalk_learn::eval::{evaluate, EvalOptions};
use myowalk_learn::rollout::EpisodeSummary;
use myowalk_learn::{TrainConfig, Trainer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "myowalk", version, about = "Muscle-driven locomotion: training, evaluation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy with PPO.
    Train(TrainArgs),
    /// Run a checkpointed policy and tabulate episode outcomes.
    Eval(EvalArgs),
    /// Drive a model with constant or random activations and record the trajectory.
    Simulate(SimulateArgs),
    /// Tabulate per-episode metabolic energy, distance, MET and CoT.
    Energy(EnergyArgs),
    /// Tabulate the normalized muscle force curves.
    MuscleCurves(CurvesArgs),
    /// Render SVG charts from metrics and trajectory files.
    Plot(PlotArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Bundled model name or model file; overrides the config.
    #[arg(long)]
    model: Option<String>,
    /// Training config file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment preset applied on top of the config (default: ours for new runs).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    iterations: Option<u64>,
    /// Continue from `<out-dir>/checkpoints/latest.json`.
    #[arg(long)]
    resume: bool,
    /// Allow writing into a non-empty output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Evaluate on this model instead of the checkpoint's.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 10)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the mean action instead of sampling.
    #[arg(long)]
    deterministic: bool,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-step trajectory records (JSON lines).
    #[arg(long)]
    export_traj: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "biped2d")]
    model: String,
    /// Training config whose `env` section is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Constant activation for every muscle.
    #[arg(long, default_value_t = 0.0, conflicts_with = "random")]
    activation: f64,
    /// Uniform random activations each control step.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnergyArgs {
    /// Policy to evaluate; otherwise constant activations on `--model`.
    #[arg(long, conflicts_with = "model")]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    activation: f64,
    #[arg(long, default_value_t = 10)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvesArgs {
    /// Curve parameter file (JSON); defaults when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Output directory for force_length.csv and force_velocity.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, required_unless_present = "traj")]
    metrics: Option<PathBuf>,
    /// Trajectory records for the activation heatmap and COM path.
    #[arg(long)]
    traj: Option<PathBuf>,
    /// Episode shown in the activation heatmap.
    #[arg(long, default_value_t = 0)]
    episode: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.chain().find_map(|c| c.downcast_ref::<CliError>()).map_or(1, |c| c.exit_code());
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Simulate(a) => simulate(a),
        Command::Energy(a) => energy(a),
        Command::MuscleCurves(a) => muscle_curves(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

/// Thread cap from `MYOWALK_THREADS`, if set.
fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("MYOWALK_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("MYOWALK_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn load_config(path: &Path) -> Result<TrainConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    TrainConfig::from_json(&text).map_err(|e| CliError::json(path, e))
}

fn load_model(name: &str) -> Result<Arc<Model>, CliError> {
    Ok(Arc::new(Model::new(resolve_model(name)?)?))
}

fn is_non_empty_dir(p: &Path) -> bool {
    std::fs::read_dir(p).is_ok_and(|mut d| d.next().is_some())
}

fn train(a: TrainArgs) -> Result<()> {
    let preset = a.preset.as_deref().map(Preset::parse).transpose()?;
    let snapshot = a.out_dir.join("config.json");
    let mut cfg = match (&a.config, a.resume) {
        (Some(p), _) => load_config(p)?,
        (None, true) => load_config(&snapshot)?,
        (None, false) => TrainConfig::default(),
    };
    match preset {
        Some(p) => p.apply(&mut cfg),
        None if !a.resume && cfg.preset.is_none() => Preset::Ours.apply(&mut cfg),
        None => {}
    }
    if let Some(m) = a.model {
        cfg.model = m;
    }
    if let Some(s) = a.seed {
        cfg.run.seed = s;
    }
    if let Some(w) = a.workers {
        cfg.run.workers = w;
    }
    if let Some(n) = a.iterations {
        cfg.run.iterations = n;
    }

    let mut trainer = if a.resume {
        let ck_path = a.out_dir.join("checkpoints").join("latest.json");
        let ck = Checkpoint::load(&ck_path).map_err(CliError::from)?;
        log::info!("resuming from {} at iteration {}", ck_path.display(), ck.iteration);
        Trainer::from_checkpoint(ck, &cfg).map_err(CliError::from)?
    } else {
        if is_non_empty_dir(&a.out_dir) {
            if !a.force {
                return Err(CliError::Usage(format!(
                    "output directory {} is not empty; pass --force to overwrite or --resume to continue",
                    a.out_dir.display()
                ))
                .into());
            }
            let ck = a.out_dir.join("checkpoints");
            if ck.exists() {
                std::fs::remove_dir_all(&ck).map_err(|e| CliError::io(&ck, e))?;
            }
        }
        Trainer::new(cfg).map_err(CliError::from)?
    };
    if let Some(cap) = thread_cap()? {
        trainer.set_threads(myowalk_learn::train::default_threads(trainer.cfg.run.workers).min(cap));
    }
    log::info!(
        "training {} (preset {}), config hash {}",
        trainer.cfg.model,
        trainer.cfg.preset.as_deref().unwrap_or("none"),
        trainer.config_hash()
    );
    trainer
        .run(&a.out_dir, |m| {
            log::info!(
                "iter {:>5} stage {} return {:>9.3} len {:>6.1} dist {:>7.3} MET {:>7.3} kl {:.4} ({:.1}s)",
                m.iteration,
                m.stage,
                m.mean_return,
                m.mean_length,
                m.mean_distance,
                m.mean_met,
                m.approx_kl,
                m.wall_clock_s
            )
        })
        .map_err(CliError::from)?;
    println!("{}", a.out_dir.join("metrics.csv").display());
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn fmt_cot(c: Option<f64>) -> String {
    c.map_or_else(String::new, |c| format!("{c}"))
}

/// Loads a checkpoint and builds its environment, optionally on another model.
fn checkpoint_env(path: &Path, model: Option<&str>) -> Result<(Checkpoint, Arc<Model>, Box<dyn Environment>), CliError> {
    let ck = Checkpoint::load(path)?;
    let model = load_model(model.unwrap_or(&ck.config.model))?;
    let mut env = build_env(model.clone(), &ck.config.env)?;
    env.set_stage(ck.stage.stage);
    ck.check_dims(env.obs_dim(), env.action_dim())?;
    Ok((ck, model, env))
}

fn eval(a: EvalArgs) -> Result<()> {
    let (ck, model, mut env) = checkpoint_env(&a.checkpoint, a.model.as_deref())?;
    let mut traj = a.export_traj.as_deref().map(|p| output(Some(p))).transpose()?;
    let mut steps = 0usize;
    let opts = EvalOptions {
        episodes: a.episodes,
        seed: a.seed,
        deterministic: a.deterministic,
        normalize_obs: ck.config.ppo.normalize_obs,
    };
    let mut io_err = None;
    let eps = evaluate(env.as_mut(), &ck.policy, &ck.norm, opts, |ep, env, tr| {
        if let Some(w) = traj.as_mut() {
            let rec = TrajRecord::capture(&model, env, ep, steps, tr);
            if let Err(e) = writeln!(w, "{}", rec.to_line()) {
                io_err.get_or_insert(e);
            }
        }
        steps = if tr.status.is_terminal() { 0 } else { steps + 1 };
    })
    .map_err(CliError::from)?;
    if let (Some(e), Some(p)) = (io_err, &a.export_traj) {
        return Err(CliError::io(p, e).into());
    }
    if let Some(mut w) = traj {
        w.flush().context("flushing trajectory file")?;
    }
    write_episode_csv(a.out.as_deref(), &eps)?;
    Ok(())
}

fn write_episode_csv(out: Option<&Path>, eps: &[EpisodeSummary]) -> Result<(), CliError> {
    let where_ = out.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    let mut w = output(out)?;
    let mut text = String::from("episode,return,steps,distance_m,met_mean_wpkg,cot,status\n");
    for (i, e) in eps.iter().enumerate() {
        text.push_str(&format!(
            "{i},{},{},{},{},{},{}\n",
            e.ret,
            e.length,
            e.distance,
            e.met_mean,
            fmt_cot(e.cot),
            e.status.as_str()
        ));
    }
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(where_, e))
}

/// Runs open-loop episodes, calling `on_step` with each transition.
fn open_loop(
    env: &mut dyn Environment,
    episodes: usize,
    seed: u64,
    mut action: impl FnMut(&mut ChaCha8Rng, usize) -> Vec<f64>,
    mut on_step: impl FnMut(usize, usize, &dyn Environment, &myowalk_core::env::Transition),
) -> Result<Vec<EpisodeSummary>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = env.action_dim();
    let mut out = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        env.reset(&mut rng);
        let (mut ret, mut step) = (0.0, 0);
        loop {
            let a = action(&mut rng, n);
            let tr = env.step(&a)?;
            ret += tr.reward;
            on_step(ep, step, &*env, &tr);
            step += 1;
            if tr.status.is_terminal() {
                out.push(EpisodeSummary {
                    worker: ep,
                    ret,
                    length: step,
                    distance: tr.info.distance,
                    met_mean: tr.info.met_mean,
                    e_total: tr.info.e_total,
                    cot: tr.info.cot,
                    status: tr.status,
                });
                break;
            }
        }
    }
    Ok(out)
}

fn check_activation(a: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&a) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--activation must be in [0, 1], got {a}")))
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    check_activation(a.activation)?;
    let env_cfg = match &a.config {
        Some(p) => load_config(p)?.env,
        None => Default::default(),
    };
    let model = load_model(&a.model)?;
    let mut env = build_env(model.clone(), &env_cfg).map_err(CliError::from)?;
    env.set_stage(Stage::Dense);
    let mut w = output(Some(&a.out))?;
    let mut io_err = None;
    let (act, random) = (a.activation, a.random);
    let eps = open_loop(
        env.as_mut(),
        a.episodes,
        a.seed,
        |rng, n| if random { (0..n).map(|_| rng.random::<f64>()).collect() } else { vec![act; n] },
        |ep, step, env, tr| {
            if let Err(e) = writeln!(w, "{}", TrajRecord::capture(&model, env, ep, step, tr).to_line()) {
                io_err.get_or_insert(e);
            }
        },
    )?;
    if let Some(e) = io_err {
        return Err(CliError::io(&a.out, e).into());
    }
    w.flush().map_err(|e| CliError::io(&a.out, e))?;
    for (i, e) in eps.iter().enumerate() {
        eprintln!("episode {i}: {} steps, {}, distance {:.3} m", e.length, e.status.as_str(), e.distance);
    }
    Ok(())
}

fn energy(a: EnergyArgs) -> Result<()> {
    let eps = match &a.checkpoint {
        Some(p) => {
            let (ck, _, mut env) = checkpoint_env(p, None)?;
            let opts = EvalOptions {
                episodes: a.episodes,
                seed: a.seed,
                deterministic: a.deterministic,
                normalize_obs: ck.config.ppo.normalize_obs,
            };
            evaluate(env.as_mut(), &ck.policy, &ck.norm, opts, |_, _, _| {}).map_err(CliError::from)?
        }
        None => {
            check_activation(a.activation)?;
            let model = load_model(a.model.as_deref().unwrap_or("biped2d"))?;
            let mut env = build_env(model, &Default::default()).map_err(CliError::from)?;
            let act = a.activation;
            open_loop(env.as_mut(), a.episodes, a.seed, |_, n| vec![act; n], |_, _, _, _| {})?
        }
    };
    let where_ = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let mut w = output(a.out.as_deref())?;
    let mut text = String::from("episode,e_total_j,distance_m,met_mean_wpkg,cot,status\n");
    for (i, e) in eps.iter().enumerate() {
        text.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            e.e_total,
            e.distance,
            e.met_mean,
            fmt_cot(e.cot),
            e.status.as_str()
        ));
    }
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(where_, e))?;
    Ok(())
}

fn muscle_curves(a: CurvesArgs) -> Result<()> {
    let params = match &a.params {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let c: CurveParams = serde_json::from_str(&text).map_err(|e| CliError::json(p, e))?;
            c.validate()
                .map_err(|(field, msg)| CliError::Usage(format!("{}: {field} {msg}", p.display())))?;
            c
        }
        None => CurveParams::default(),
    };
    plot::write_all(
        &a.out,
        vec![
            ("force_length.csv".into(), curves::force_length_csv(&params)),
            ("force_velocity.csv".into(), curves::force_velocity_csv(&params)),
        ],
    )?;
    Ok(())
}

fn plot_cmd(a: PlotArgs) -> Result<()> {
    let mut files: Vec<(String, String)> = Vec::new();
    if let Some(m) = &a.metrics {
        let cols = plot::read_metric_columns(m)?;
        files.extend(plot::metrics_charts(&cols).into_iter().map(|(n, s)| (n.to_string(), s)));
    }
    if let Some(t) = &a.traj {
        let recs = read_traj(t)?;
        if recs.is_empty() {
            return Err(CliError::NoData {
                path: t.clone(),
                what: "trajectory file has no records".into(),
            }
            .into());
        }
        files.push(("activation_heatmap.svg".into(), plot::activation_heatmap(&recs, a.episode)));
        files.push(("com_path.svg".into(), plot::com_path(&recs)));
    }
    for p in plot::write_all(&a.out, files)? {
        println!("{}", p.display());
    }
    Ok(())
}
