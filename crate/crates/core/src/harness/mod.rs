//! Config-driven experiments: single runs, parameter sweeps, summary
//! statistics and CSV output.
//!
//! Every run draws its environment and exploration seeds from
//! [`RunSeeds::derive`], so a config and base seed fully determine the
//! output files regardless of thread count.

mod config;
mod output;
mod run;
mod sweep;

pub use config::{
    AgentConfig, Centering, ControlConfig, ExperimentConfig, FeatureSpec, PolicySpec, PredictionConfig,
    RmsveWeighting,
};
pub use output::{
    echo_config, flatten_config, format_float, write_curves, write_failures, write_run_outputs, write_summary,
    write_sweep_outputs, CURVES_HEADER, FAILURES_HEADER, SUMMARY_METRICS,
};
pub use run::{
    agent_rng, build_env, mix_seed, rmsve, run_control, run_experiment, run_prediction, Featurizer, Metric, Record,
    RunLog, RunSeeds, AGENT_STREAM, ENV_STREAM,
};
pub use sweep::{
    mean_stderr, run_cells, summarize, thread_limit, Axis, CellResult, RunFailure, SummaryRow, SweepConfig,
    THREADS_VAR,
};
