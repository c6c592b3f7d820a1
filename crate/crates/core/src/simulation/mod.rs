//! Deterministic parallel Monte Carlo experiments.

mod config;
mod probes;
mod runner;
mod tables;

pub use config::{
    ExperimentConfig, FunctionChoice, OutputKind, CONFIG_SCHEMA, DEFAULT_CI_LEVEL,
    DEFAULT_REPLICATES,
};
pub use probes::{
    convergence_probe, density_curve, ConvergenceRow, DensityCurve, DEFAULT_CURVE_RESOLUTION,
    DEFAULT_CURVE_X,
};
pub use runner::{
    replicate_stream, resolve_workers, run_experiment, run_replicates, summarize, target_mean,
    ReplicateFailure, ReplicateResult, SimulationSummary, SummaryRow, SUMMARY_SCHEMA,
};
pub use tables::{
    summary_record, table_config, table_record, FOLDED_RMSE_R_VALUES, FOLDED_VAR_R_VALUES,
    RAW_VAR_R_VALUES, RMSE_N, RMSE_R_VALUES, SUMMARY_COLUMNS, VAR_TABLE_N_VALUES,
};
