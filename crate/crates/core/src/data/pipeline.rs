use serde::{Deserialize, Serialize};

use super::clean::{clean_alphanumeric, drop_zero_targets, normalize_units};
use super::dataset::{CleanDataset, ColumnKind, ColumnMeta, TARGET_COLUMN};
use super::encode::{encode_categoricals, Vocabularies};
use super::prune::prune_correlated;
use super::report::CleaningReport;
use super::table::RawTable;
use crate::error::Result;

/// Column roles for the SPEC CPU 2017 results table (names after cleaning).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub target: String,
    /// Never used as features: the other benchmark score and free text.
    pub excluded: Vec<String>,
    pub unit_columns: Vec<String>,
    pub numeric_columns: Vec<String>,
    pub correlation_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        Self {
            target: TARGET_COLUMN.into(),
            excluded: s(&["peakresult", "disclosures"]),
            unit_columns: s(&[
                "1stlevelcache",
                "2ndlevelcache",
                "3rdlevelcache",
                "othercache",
                "memory",
            ]),
            numeric_columns: s(&[
                "energypeakresult",
                "energybaseresult",
                "#cores",
                "#chips",
                "memory",
                "#enabledthreadspercore",
                "processormhz",
                "1stlevelcache",
                "2ndlevelcache",
                "3rdlevelcache",
                "othercache",
            ]),
            correlation_threshold: 0.7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub dataset: CleanDataset,
    pub report: CleaningReport,
    pub vocabularies: Vocabularies,
}

/// Runs every cleaning step in order and assembles the training table.
pub fn run_pipeline(table: &RawTable, config: &PipelineConfig) -> Result<PipelineOutput> {
    let mut report = CleaningReport {
        source: table.source.as_ref().map(|p| p.display().to_string()),
        input_rows: table.row_count(),
        input_columns: table.columns.len(),
        ..CleaningReport::default()
    };

    let (table, step) = clean_alphanumeric(table);
    report.alphanumeric = step;

    let (table, step) = drop_zero_targets(&table, &config.target)?;
    report.outliers = step;

    let (table, step) = normalize_units(&table, &config.unit_columns);
    report.units = step;

    let feature_columns: Vec<String> = table
        .columns
        .iter()
        .filter(|c| **c != config.target && !config.excluded.contains(c))
        .cloned()
        .collect();
    let (encoded, mut vocabularies, mut step) =
        encode_categoricals(&table, &feature_columns, &config.numeric_columns);
    step.excluded_columns = table
        .columns
        .iter()
        .filter(|c| config.excluded.contains(c))
        .cloned()
        .collect();
    report.categorical = step;

    let (retained, step) = prune_correlated(
        &encoded.names,
        &encoded.values,
        config.correlation_threshold,
    );
    report.correlation = step;
    vocabularies
        .0
        .retain(|name, _| retained.iter().any(|&i| encoded.names[i] == *name));

    let target_idx = table
        .column_index(&config.target)
        .expect("target checked by drop_zero_targets");
    let target: Vec<f64> = table
        .column(target_idx)
        .map(|c| {
            c.trim()
                .parse()
                .expect("target parsed by drop_zero_targets")
        })
        .collect();
    let columns = retained
        .iter()
        .map(|&i| {
            let name = &encoded.names[i];
            ColumnMeta {
                name: name.clone(),
                kind: if encoded.categorical[i] {
                    ColumnKind::Categorical
                } else {
                    ColumnKind::Numeric
                },
                unit: (config.unit_columns.contains(name) && !encoded.categorical[i])
                    .then(|| "MB".to_string()),
            }
        })
        .collect();
    let features = (0..target.len())
        .map(|r| retained.iter().map(|&i| encoded.values[i][r]).collect())
        .collect();
    let dataset = CleanDataset::new(columns, features, target)?;
    report.output_rows = dataset.n_rows();
    report.output_features = dataset.n_features();
    Ok(PipelineOutput {
        dataset,
        report,
        vocabularies,
    })
}
