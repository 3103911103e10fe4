use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ooi::config::{AgentKind, EnvConfig, ExperimentConfig, MazeVariant};
use ooi::fixture::FscFixture;
use ooi::harness::{best_window_mean, run_and_emit, run_experiment, trailing_mean};
use ooi_core::envs::dupinput;
use ooi_core::fsc::{compile_fsc, compiled_trace, fsc_trace, make_alternator, memoryless_search, trace_distance, DEFAULT_STATE_BOUND};

#[derive(Parser)]
#[command(name = "ooi", about = "Options with option-observation initiation sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train (or roll out) the configured agent over every run and write the
    /// aggregated curve, a metadata file and checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Compare an FSC against its option compilation on every observation
    /// sequence up to `--length`.
    VerifyFsc {
        /// TOML fixture; the two-node alternator when omitted.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        length: usize,
        /// Sampled sequences when exhaustive enumeration exceeds 1e5.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Roll out a hand-written agent and report its mean return.
    Oracle {
        #[arg(long, value_enum)]
        env: OracleEnv,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleEnv {
    Treemaze,
    Dupinput,
    Gathering,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train { config, out, seed, runs, episodes } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg: ExperimentConfig = toml::from_str(&text).context("parsing config")?;
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(e) = episodes {
                cfg.episodes = e;
            }
            cfg.validate()?;
            let records = run_and_emit(&cfg, &out)?;
            for r in &records {
                println!(
                    "run {:>2}  trailing_mean {:>8.4}  best {:>8.4}  wall {:>7.1}s{}",
                    r.run,
                    r.trailing_mean(cfg.eval_window),
                    best_window_mean(&r.returns, cfg.eval_window),
                    r.wall_time.as_secs_f64(),
                    r.error.as_deref().map(|e| format!("  error: {e}")).unwrap_or_default()
                );
            }
            println!("wrote {}", out.join(format!("{}.csv", cfg.experiment_name())).display());
        }
        Command::VerifyFsc { fixture, length, samples, seed } => {
            let fsc = match fixture {
                Some(path) => FscFixture::parse(&fs::read_to_string(&path)?)?,
                None => make_alternator(),
            };
            let compiled = compile_fsc(&fsc);
            let k = fsc.observation_count();
            let sequences = sequences(k, length, samples, seed);
            let mut worst: f64 = 0.0;
            for seq in &sequences {
                let a = fsc_trace(&fsc, seq, DEFAULT_STATE_BOUND)?;
                let b = compiled_trace(&compiled, seq, DEFAULT_STATE_BOUND)?;
                worst = worst.max(trace_distance(&a, &b));
            }
            println!("sequences {}  max trace distance {:e}", sequences.len(), worst);
            let probe: Vec<usize> = (0..length.max(1)).map(|i| i % k).collect();
            let target = fsc_trace(&fsc, &probe, DEFAULT_STATE_BOUND)?;
            match memoryless_search(&compiled.without_oois(), k, fsc.action_count(), &probe, &target, 1e-9) {
                Ok(search) => println!(
                    "without OOIs: {} memoryless top levels, longest matching prefix {} of {}",
                    search.policies,
                    search.best_prefix,
                    probe.len()
                ),
                Err(e) => println!("without OOIs: search skipped ({e})"),
            }
            if worst > 1e-9 {
                bail!("compiled controller disagrees with the FSC");
            }
        }
        Command::Oracle { env, episodes, seed } => {
            let (env_cfg, agent) = match env {
                OracleEnv::Treemaze => (
                    EnvConfig::Treemaze { variant: MazeVariant::Full14, successors: Default::default() },
                    AgentKind::ScriptedOracle,
                ),
                OracleEnv::Dupinput => (EnvConfig::Dupinput { random_options: None }, AgentKind::ScriptedOracle),
                OracleEnv::Gathering => (EnvConfig::Gathering, AgentKind::Expert),
            };
            let mut cfg = ExperimentConfig::new(env_cfg, agent, episodes);
            cfg.runs = 1;
            cfg.base_seed = seed;
            let record = run_experiment(&cfg)?.remove(0);
            if let Some(e) = record.error {
                bail!(e);
            }
            println!("mean return over {} episodes: {:.4}", episodes, trailing_mean(&record.returns, episodes));
            if let OracleEnv::Dupinput = env {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (mut opt, mut copy) = (0.0, 0.0);
                for _ in 0..episodes {
                    let tape = dupinput::random_tape(&mut rng);
                    opt += dupinput::dedup_oracle(&tape).1;
                    copy += dupinput::copy_only_return(&tape);
                }
                let n = episodes as f64;
                println!("expected optimum {:.4}  copy-only {:.4}", opt / n, copy / n);
            }
        }
    }
    Ok(())
}

/// All sequences of length 1..=`length`, or `samples` random ones of length
/// `length` when there would be more than 1e5.
fn sequences(k: usize, length: usize, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    let total: f64 = (1..=length).map(|l| (k as f64).powi(l as i32)).sum();
    if total > 1e5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return (0..samples).map(|_| (0..length).map(|_| rng.gen_range(0..k)).collect()).collect();
    }
    let mut out = Vec::new();
    let mut frontier = vec![Vec::new()];
    for _ in 0..length {
        frontier = frontier
            .into_iter()
            .flat_map(|s: Vec<usize>| {
                (0..k).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}
