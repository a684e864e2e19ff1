use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use super::config::ExperimentConfig;
use crate::agents::{Agent, AgentConfig, Algorithm};
use crate::environments::{make_env, EnvSpec};
use crate::error::{Error, Result};
use crate::oracles::{
    average_reward_vi, compute_diameter_report, regret_constant, DiameterReport, DEFAULT_MAX_ITER,
    DEFAULT_SPAN_TOL,
};

pub const CSV_HEADER: &str = "algo,env,seed,t,cum_reward,regret";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: u64,
    pub cum_reward: f64,
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub algo: Algorithm,
    pub env: String,
    /// Replication index.
    pub seed: usize,
    pub gain: f64,
    pub points: Vec<TracePoint>,
    /// Episodes started up to the horizon, `K(T)`.
    pub episodes: u64,
    pub planning_secs: f64,
    pub total_secs: f64,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.regret)
    }

    pub fn regret_at(&self, t: u64) -> Option<f64> {
        self.points.iter().find(|p| p.t == t).map(|p| p.regret)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub algo: Algorithm,
    pub seed: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub env_params: serde_json::Value,
    pub gain: f64,
    pub diameter: DiameterReport,
    pub regret_constant: f64,
    pub traces: Vec<RegretTrace>,
    pub failures: Vec<RunFailure>,
}

/// 64-bit FNV-1a over the label bytes followed by the little-endian replication index.
pub fn stream_hash(label: &str, replication: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    label
        .as_bytes()
        .iter()
        .chain(&replication.to_le_bytes())
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Seed of the environment stream for replication `r`; shared by every algorithm.
pub fn env_seed(base_seed: u64, env: &str, replication: u64) -> u64 {
    base_seed ^ stream_hash(env, replication)
}

/// Runs one learner for `horizon` steps from the environment's initial state.
pub fn run_replication(
    env: &EnvSpec,
    gain: f64,
    algo: Algorithm,
    replication: usize,
    config: &ExperimentConfig,
    checkpoints: &[u64],
) -> Result<RegretTrace> {
    let clock = Instant::now();
    let mdp = &env.mdp;
    let mut agent = Agent::new(
        mdp.shared_structure(),
        AgentConfig {
            algorithm: algo,
            delta: config.delta,
            reward_mode: config.reward_mode,
            ..AgentConfig::default()
        },
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(env_seed(config.base_seed, &env.name, replication as u64));
    let mut rewards = vec![0.0; mdp.structure().num_reward_factors()];
    let mut state = env.initial_state;
    let mut cum = 0.0;
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().copied().peekable();
    for t in 1..=config.horizon {
        let action = agent.act(state);
        let (next, collapsed) = mdp.step_into(state, action, &mut rng, &mut rewards);
        cum += collapsed;
        agent.observe(state, action, &rewards, next)?;
        state = next;
        if next_cp.peek() == Some(&t) {
            next_cp.next();
            points.push(TracePoint {
                t,
                cum_reward: cum,
                regret: t as f64 * gain - cum,
            });
        }
    }
    Ok(RegretTrace {
        algo,
        env: env.name.clone(),
        seed: replication,
        gain,
        points,
        episodes: agent.episodes(),
        planning_secs: agent.planning_time().as_secs_f64(),
        total_secs: clock.elapsed().as_secs_f64(),
    })
}

/// All `(algorithm, replication)` runs, in config order, on a pool of `workers` threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let env = make_env(&config.env, &config.env_params)?;
    let flat = env.mdp.flatten()?;
    let gain = average_reward_vi(&flat, DEFAULT_SPAN_TOL, DEFAULT_MAX_ITER)?.gain;
    let diameter = compute_diameter_report(&env.mdp)?;
    let c = regret_constant(&env.mdp, &diameter);
    info!(env = %env.name, gain, diameter = diameter.diameter, "oracle ready");
    let checkpoints = config.checkpoints();
    let jobs: Vec<(Algorithm, usize)> = config
        .algorithms
        .iter()
        .flat_map(|&a| (0..config.replications).map(move |r| (a, r)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let outcomes: Vec<(Algorithm, usize, Result<RegretTrace>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(a, r)| (a, r, run_replication(&env, gain, a, r, config, &checkpoints)))
            .collect()
    });
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (algo, seed, outcome) in outcomes {
        match outcome {
            Ok(tr) => traces.push(tr),
            Err(e @ Error::NonConvergence { .. }) => {
                warn!(%algo, seed, error = %e, "replication aborted");
                failures.push(RunFailure {
                    algo,
                    seed,
                    error: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ExperimentResult {
        config: config.clone(),
        env_params: env.params,
        gain,
        diameter,
        regret_constant: c,
        traces,
        failures,
    })
}

pub fn write_csv(traces: &[RegretTrace], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for tr in traces {
        for p in &tr.points {
            writeln!(
                out,
                "{},{},{},{},{:.16e},{:.16e}",
                tr.algo, tr.env, tr.seed, p.t, p.cum_reward, p.regret
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a ExperimentConfig,
    env_params: &'a serde_json::Value,
    gain: f64,
    diameter: f64,
    regret_constant: f64,
    factored_diameter: &'a [Vec<f64>],
    runs: Vec<SidecarRun>,
    failures: &'a [RunFailure],
}

#[derive(Serialize)]
struct SidecarRun {
    algo: Algorithm,
    seed: usize,
    episodes: u64,
    final_regret: f64,
    planning_secs: f64,
    total_secs: f64,
}

/// Writes `<label>.csv` and `<label>.json` into `dir`; returns both paths.
pub fn write_outputs(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let label = result.config.label();
    let csv_path = dir.join(format!("{label}.csv"));
    let json_path = dir.join(format!("{label}.json"));
    let mut w = BufWriter::new(fs::File::create(&csv_path)?);
    write_csv(&result.traces, &mut w)?;
    w.flush()?;
    let sidecar = Sidecar {
        config: &result.config,
        env_params: &result.env_params,
        gain: result.gain,
        diameter: result.diameter.diameter,
        regret_constant: result.regret_constant,
        factored_diameter: &result.diameter.factored,
        runs: result
            .traces
            .iter()
            .map(|t| SidecarRun {
                algo: t.algo,
                seed: t.seed,
                episodes: t.episodes,
                final_regret: t.final_regret(),
                planning_secs: t.planning_secs,
                total_secs: t.total_secs,
            })
            .collect(),
        failures: &result.failures,
    };
    fs::write(&json_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok((csv_path, json_path))
}
