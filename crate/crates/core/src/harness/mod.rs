//! Seeded, parallel regret experiments and their outputs.

mod config;
mod run;
mod stats;

pub use config::ExperimentConfig;
pub use run::{
    env_seed, run_experiment, run_replication, stream_hash, write_csv, write_outputs, ExperimentResult, RegretTrace,
    RunFailure, TracePoint, CSV_HEADER,
};
pub use stats::{aggregate, quantile, sign_test, sign_test_p, AggregateRow, SignTest};
