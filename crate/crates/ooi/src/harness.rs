//! Seeded multi-run training loop, aggregation across runs and CSV output.

use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::RngCore;
use rayon::prelude::*;
use thiserror::Error;

use ooi_core::envs::dupinput::{self, DupInput, DupOptionsMode};
use ooi_core::envs::gathering::{self, Gathering};
use ooi_core::envs::treemaze::{self, TreeMaze};
use ooi_core::learner::PolicyGradientAgent;
use ooi_core::scripted::ScriptedAgent;
use ooi_core::seed::{stream, StreamRole};
use ooi_core::{run_episode, Agent, Environment, OptionSpec, OptionsError};

use crate::checkpoint;
use crate::config::{AgentKind, ConfigError, EnvConfig, ExperimentConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no run records to aggregate")]
    EmptyInput,
    #[error("run {run} has {found} episodes, expected {expected}")]
    RaggedInput { run: usize, expected: usize, found: usize },
    #[error("agent {agent} is not defined for environment {env}")]
    UnsupportedAgent { agent: &'static str, env: String },
    #[error("malformed CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    /// Undiscounted return of every completed episode.
    pub returns: Vec<f64>,
    /// Base seed the run's streams were derived from.
    pub seed: u64,
    pub wall_time: Duration,
    /// Set when the run stopped on an error; `returns` holds the episodes
    /// completed before it.
    pub error: Option<String>,
    pub stopped_early: bool,
}

impl RunRecord {
    /// Mean of the last `window` returns (fewer if the run is shorter).
    pub fn trailing_mean(&self, window: usize) -> f64 {
        trailing_mean(&self.returns, window)
    }
}

/// Largest mean over any `window` consecutive returns; NaN for runs shorter
/// than the window.
pub fn best_window_mean(returns: &[f64], window: usize) -> f64 {
    if window == 0 || returns.len() < window {
        return f64::NAN;
    }
    let mut sum: f64 = returns[..window].iter().sum();
    let mut best = sum;
    for i in window..returns.len() {
        sum += returns[i] - returns[i - window];
        best = best.max(sum);
    }
    best / window as f64
}

pub fn trailing_mean(returns: &[f64], window: usize) -> f64 {
    let tail = &returns[returns.len().saturating_sub(window)..];
    if tail.is_empty() {
        return f64::NAN;
    }
    tail.iter().sum::<f64>() / tail.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

pub enum AnyAgent {
    Learned(Box<PolicyGradientAgent>),
    Scripted(ScriptedAgent),
}

impl AnyAgent {
    pub fn as_agent(&mut self) -> &mut dyn Agent {
        match self {
            AnyAgent::Learned(a) => a.as_mut(),
            AnyAgent::Scripted(a) => a,
        }
    }
}

pub fn build_env(env: &EnvConfig) -> Box<dyn Environment + Send> {
    match env {
        EnvConfig::Treemaze { .. } => Box::new(TreeMaze::new()),
        EnvConfig::Dupinput { .. } => Box::new(DupInput::new()),
        EnvConfig::Gathering => Box::new(Gathering::new()),
    }
}

/// The option set of an OOI agent. Random initiation sets are drawn from the
/// run's `InitiationSets` stream.
pub fn build_options(env: &EnvConfig, rng: &mut dyn RngCore) -> Vec<OptionSpec> {
    match *env {
        EnvConfig::Treemaze { variant, successors } => treemaze::treemaze_options(variant.into(), successors.into()),
        EnvConfig::Dupinput { random_options: None } => dupinput::dupinput_options(DupOptionsMode::Designed, rng),
        EnvConfig::Dupinput { random_options: Some(n) } => dupinput::dupinput_options(DupOptionsMode::Random(n), rng),
        EnvConfig::Gathering => gathering::gathering_options(),
    }
}

/// Agent for run `run`, with network weights drawn from its own stream.
pub fn build_agent(cfg: &ExperimentConfig, run: usize) -> Result<AnyAgent, HarnessError> {
    let unsupported = || HarnessError::UnsupportedAgent { agent: cfg.agent.name(), env: cfg.env.name() };
    match (cfg.agent, cfg.env) {
        (AgentKind::Expert, EnvConfig::Gathering) => Ok(AnyAgent::Scripted(ScriptedAgent::gathering_expert())),
        (AgentKind::ScriptedOracle, EnvConfig::Treemaze { variant, successors }) => Ok(AnyAgent::Scripted(
            ScriptedAgent::treemaze_oracle(variant.into(), successors.into()),
        )),
        (AgentKind::ScriptedOracle, EnvConfig::Dupinput { random_options: None }) => {
            Ok(AnyAgent::Scripted(ScriptedAgent::dupinput_oracle()))
        }
        (AgentKind::Expert | AgentKind::ScriptedOracle, _) => Err(unsupported()),
        (kind, env) => {
            let mut oois = stream(cfg.base_seed, run as u64, StreamRole::InitiationSets);
            let mut options = build_options(&env, &mut oois);
            if kind == AgentKind::NoOoi {
                options = ooi_core::options::without_oois(&options);
            }
            let probe = build_env(&env);
            let mut init = stream(cfg.base_seed, run as u64, StreamRole::NetworkInit);
            Ok(AnyAgent::Learned(Box::new(PolicyGradientAgent::new(
                options,
                probe.feature_dim(),
                probe.action_count(),
                cfg.learner(),
                &mut init,
            ))))
        }
    }
}

/// Trains (or just runs, for scripted agents) one seeded run. `on_episode`
/// sees the returns so far after every episode and may stop the run.
pub fn train_run<F>(cfg: &ExperimentConfig, run: usize, on_episode: F) -> Result<RunRecord, HarnessError>
where
    F: FnMut(&[f64]) -> Control,
{
    train_run_with_agent(cfg, run, on_episode).map(|(record, _)| record)
}

/// [`train_run`] that also hands back the trained agent.
pub fn train_run_with_agent<F>(
    cfg: &ExperimentConfig,
    run: usize,
    mut on_episode: F,
) -> Result<(RunRecord, AnyAgent), HarnessError>
where
    F: FnMut(&[f64]) -> Control,
{
    cfg.validate()?;
    let start = Instant::now();
    let mut agent = build_agent(cfg, run)?;
    let mut env = build_env(&cfg.env);
    let mut env_rng = stream(cfg.base_seed, run as u64, StreamRole::Environment);
    let mut policy_rng = stream(cfg.base_seed, run as u64, StreamRole::Policy);
    let mut record = RunRecord {
        run,
        returns: Vec::with_capacity(cfg.episodes),
        seed: cfg.base_seed,
        wall_time: Duration::ZERO,
        error: None,
        stopped_early: false,
    };
    for _ in 0..cfg.episodes {
        let outcome = run_episode(env.as_mut(), agent.as_agent(), &mut env_rng, &mut policy_rng, cfg.step_limit)
            .and_then(|traj| {
                if let AnyAgent::Learned(learner) = &mut agent {
                    learner.learn(&traj).map_err(OptionsError::from)?;
                }
                Ok(traj.total_reward())
            });
        match outcome {
            Ok(ret) => record.returns.push(ret),
            Err(e) => {
                record.error = Some(e.to_string());
                break;
            }
        }
        if on_episode(&record.returns) == Control::Stop {
            record.stopped_early = record.returns.len() < cfg.episodes;
            break;
        }
    }
    record.wall_time = start.elapsed();
    Ok((record, agent))
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool")
}

/// Every run of the experiment, in run order. Runs execute in parallel on
/// `cfg.workers` threads; a failing run is recorded in its `error` field.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, HarnessError> {
    cfg.validate()?;
    build_agent(cfg, 0)?;
    pool(cfg.workers).install(|| {
        (0..cfg.runs).into_par_iter().map(|run| train_run(cfg, run, |_| Control::Continue)).collect()
    })
}

/// Like [`run_experiment`] with a per-run episode callback, e.g. for early
/// stopping once a threshold is met.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, on_episode: F) -> Result<Vec<RunRecord>, HarnessError>
where
    F: Fn(usize, &[f64]) -> Control + Sync,
{
    cfg.validate()?;
    build_agent(cfg, 0)?;
    pool(cfg.workers).install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|run| train_run(cfg, run, |returns| on_episode(run, returns)))
            .collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    pub mean: f64,
    pub std: f64,
}

/// Element-wise mean and population standard deviation across runs, then a
/// trailing moving average of width `smoothing` over both columns
/// (`smoothing <= 1` leaves the curve as is).
pub fn aggregate(records: &[Vec<f64>], smoothing: usize) -> Result<Vec<CurvePoint>, HarnessError> {
    let first = records.first().ok_or(HarnessError::EmptyInput)?;
    let len = first.len();
    if let Some((run, r)) = records.iter().enumerate().find(|(_, r)| r.len() != len) {
        return Err(HarnessError::RaggedInput { run, expected: len, found: r.len() });
    }
    let n = records.len() as f64;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for k in 0..len {
        let m = records.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = records.iter().map(|r| (r[k] - m) * (r[k] - m)).sum::<f64>() / n;
        mean[k] = m;
        std[k] = var.sqrt();
    }
    let mean = moving_average(&mean, smoothing);
    let std = moving_average(&std, smoothing);
    Ok((0..len).map(|episode| CurvePoint { episode, mean: mean[episode], std: std[episode] }).collect())
}

/// Trailing moving average; the first `width - 1` points average over what
/// is available.
pub fn moving_average(xs: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return xs.to_vec();
    }
    (0..xs.len())
        .map(|i| {
            let window = &xs[(i + 1).saturating_sub(width)..=i];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect()
}

pub fn write_csv<W: Write>(curve: &[CurvePoint], out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "episode,mean,std")?;
    for p in curve {
        writeln!(w, "{},{},{}", p.episode, p.mean, p.std)?;
    }
    w.flush()
}

pub fn emit_csv(curve: &[CurvePoint], path: &Path) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    write_csv(curve, fs::File::create(path)?)?;
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<CurvePoint>, HarnessError> {
    let mut lines = input.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == "episode,mean,std" => {}
        _ => return Err(HarnessError::Csv { line: 1, reason: "missing header".into() }),
    }
    let mut curve = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let bad = |reason: &str| HarnessError::Csv { line: i + 2, reason: reason.into() };
        let mut fields = line.split(',');
        let (Some(e), Some(m), Some(s), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
            return Err(bad("expected three fields"));
        };
        curve.push(CurvePoint {
            episode: e.parse().map_err(|_| bad("episode"))?,
            mean: m.parse().map_err(|_| bad("mean"))?,
            std: s.parse().map_err(|_| bad("std"))?,
        });
    }
    Ok(curve)
}

/// Runs the experiment and writes `<name>.csv` and `<name>.toml` (the
/// resolved config plus per-run summaries) into `out_dir`.
/// Learned agents additionally leave one checkpoint per run under
/// `out_dir/checkpoints/`.
pub fn run_and_emit(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    cfg.validate()?;
    build_agent(cfg, 0)?;
    let name = cfg.experiment_name();
    let ckpt_dir = out_dir.join("checkpoints");
    if cfg.agent.learns() {
        fs::create_dir_all(&ckpt_dir)?;
    }
    let records: Vec<RunRecord> = pool(cfg.workers).install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|run| {
                let (record, agent) = train_run_with_agent(cfg, run, |_| Control::Continue)?;
                if let AnyAgent::Learned(learner) = &agent {
                    let file = fs::File::create(ckpt_dir.join(format!("{name}_run{run}.ckpt")))?;
                    checkpoint::write_arrays(&checkpoint::agent_arrays(learner), BufWriter::new(file))?;
                }
                Ok(record)
            })
            .collect::<Result<_, HarnessError>>()
    })?;
    let complete: Vec<Vec<f64>> = records.iter().filter(|r| r.error.is_none()).map(|r| r.returns.clone()).collect();
    let curve = aggregate(&complete, cfg.smoothing)?;
    fs::create_dir_all(out_dir)?;
    emit_csv(&curve, &out_dir.join(format!("{name}.csv")))?;
    fs::write(out_dir.join(format!("{name}.toml")), metadata(cfg, &records)?)?;
    Ok(records)
}

/// Resolved config followed by one commented summary line per run. Wall
/// times live here rather than in the CSV so the CSV stays reproducible.
pub fn metadata(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<String, HarnessError> {
    let mut text = cfg.to_toml()?;
    text.push('\n');
    for r in records {
        text.push_str(&format!(
            "# run {} episodes {} trailing_mean {:.4} best_window_mean {:.4} wall_time_s {:.3}{}\n",
            r.run,
            r.returns.len(),
            r.trailing_mean(cfg.eval_window),
            best_window_mean(&r.returns, cfg.eval_window),
            r.wall_time.as_secs_f64(),
            r.error.as_deref().map(|e| format!(" error {e}")).unwrap_or_default(),
        ));
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_is_trailing() {
        assert_eq!(moving_average(&[1.0, 3.0, 5.0, 7.0], 2), vec![1.0, 2.0, 4.0, 6.0]);
        assert_eq!(moving_average(&[1.0, 3.0], 1), vec![1.0, 3.0]);
    }

    #[test]
    fn aggregate_rejects_ragged_runs() {
        let err = aggregate(&[vec![1.0, 2.0], vec![1.0]], 1).unwrap_err();
        assert!(matches!(err, HarnessError::RaggedInput { run: 1, .. }));
        assert!(matches!(aggregate(&[], 1), Err(HarnessError::EmptyInput)));
    }

    #[test]
    fn trailing_mean_uses_the_tail() {
        assert_eq!(trailing_mean(&[0.0, 0.0, 4.0, 6.0], 2), 5.0);
        assert_eq!(trailing_mean(&[2.0], 10), 2.0);
    }
}
