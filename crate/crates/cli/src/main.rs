use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dbn_ucrl::environments::{make_env, ENV_NAMES};
use dbn_ucrl::fmdp::{read_model, write_model};
use dbn_ucrl::harness::{aggregate, run_experiment, write_outputs, ExperimentConfig};
use dbn_ucrl::oracles::{
    average_reward_vi, compute_diameter_report, regret_constant, DEFAULT_MAX_ITER, DEFAULT_SPAN_TOL,
};
use dbn_ucrl::verification;
use serde_json::json;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "fmdp-bench", version, about = "Regret benchmarks for optimistic learners in factored MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Overrides the worker count of the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Exact gain, diameter and regret constant of a model file.
    Plan {
        #[arg(long)]
        model: PathBuf,
        /// Include the per-factor diameter table.
        #[arg(long)]
        factored_diameter: bool,
    },
    /// Run the numeric inequality checks.
    Verify,
    /// List the built-in environments or dump one as a model file.
    Envs {
        #[arg(long, requires = "dump_model")]
        name: Option<String>,
        #[arg(long, requires = "name")]
        dump_model: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, workers } => {
            let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            let result = run_experiment(&cfg)?;
            let (csv, sidecar) = write_outputs(&result, &out)?;
            let agg = aggregate(&result.traces)?;
            for algo in &cfg.algorithms {
                if let Some(last) = agg.iter().filter(|r| r.algo == *algo).last() {
                    eprintln!(
                        "{algo:>16}  T={}  mean regret {:.2}  [q10 {:.2}, q90 {:.2}]",
                        last.t, last.mean, last.q10, last.q90
                    );
                }
            }
            eprintln!("wrote {} and {}", csv.display(), sidecar.display());
            Ok(if result.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Plan { model, factored_diameter } => {
            let mdp = read_model(&model).with_context(|| format!("reading {}", model.display()))?;
            let gain = average_reward_vi(&mdp.flatten()?, DEFAULT_SPAN_TOL, DEFAULT_MAX_ITER)?;
            let report = compute_diameter_report(&mdp)?;
            let support: Vec<_> = report
                .support_sizes
                .iter()
                .map(|k| {
                    json!({
                        "min": k.iter().min(),
                        "max": k.iter().max(),
                        "mean": k.iter().sum::<usize>() as f64 / k.len() as f64,
                    })
                })
                .collect();
            let mut out = json!({
                "gain": gain.gain,
                "diameter": report.diameter,
                "support_sizes": support,
                "regret_constant": regret_constant(&mdp, &report),
            });
            if factored_diameter {
                out["factored_diameter"] = json!(report.factored);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let report = verification::run_all(0);
            for line in &report {
                println!("{line}");
            }
            Ok(if report.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Envs { name, dump_model } => {
            if let (Some(name), Some(path)) = (name, dump_model) {
                let env = make_env(&name, &serde_json::Value::Null)?;
                write_model(&env.mdp, &path)?;
                eprintln!("wrote {}", path.display());
            } else {
                for name in ENV_NAMES {
                    let env = make_env(name, &serde_json::Value::Null)?;
                    let st = env.mdp.structure();
                    println!(
                        "{name:<18} S={:<4} A={:<3} |X|={:<5} m={} l={}",
                        st.num_states(),
                        st.num_actions(),
                        st.num_pairs(),
                        st.num_state_factors(),
                        st.num_reward_factors()
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
