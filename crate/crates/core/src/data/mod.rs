//! Cleaning, encoding, correlation pruning and splitting of benchmark result tables.

mod clean;
mod dataset;
mod encode;
mod kendall;
mod pipeline;
mod prune;
mod report;
mod split;
mod synthetic;
mod table;

pub use clean::{
    clean_alphanumeric, drop_zero_targets, normalize_units, parse_quantity_mb, MISSING,
};
pub use dataset::{CleanDataset, ColumnKind, ColumnMeta, Standardizer};
pub use encode::{encode_categoricals, Vocabularies, Vocabulary};
pub use kendall::{kendall_tau, KendallTau};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
pub use prune::prune_correlated;
pub use report::{
    AlphanumericStep, CategoricalStep, CleaningReport, CorrelationStep, DroppedColumn, OutlierStep,
    RemovedRow, UnconvertibleCell, UnitStep,
};
pub use split::{split_dataset, Split, SplitIndices, SplitSpec};
pub use synthetic::{synthetic_dataset, SyntheticSpec};
pub use table::RawTable;
