//! Experiment machinery: training loop, multi-seed runs, grid enumeration,
//! ranking and plot-ready exports.

mod config;
mod experiment;
mod export;
mod grid;
mod metrics;
mod pool;
mod rank;
mod train;

pub use config::{
    seeds_from_master, ConfigIdentity, ExperimentConfig, DEFAULT_BATCH_SIZE, DEFAULT_SEED_COUNT,
    EPOCH_SCHEDULE,
};
pub use experiment::{
    prepare_split, run_baselines, run_experiment, run_seed, BaselineKind, ResultRecord, SeedOutcome,
};
pub use export::{
    epoch_trace_svg, export_epoch_trace, export_residual_diagnostics, qq_pairs, render_svg_plot,
    ResidualDiagnostics, Series, TRACE_HEADER,
};
pub use grid::{
    enumerate_grid, CnnEntry, Exclusion, GridDocument, GridExpansion, MlpEntry, OneOrMany,
    ResidualEntry,
};
pub use metrics::{compute_metrics, MetricsTriple};
pub use pool::{run_grid, Progress};
pub use rank::{
    rank_results, read_results_csv, results_csv, RankedTables, ResultRow, RESULTS_HEADER,
};
pub use train::{train_model, EpochMetrics, TrainOptions, TrainedModel};
