use serde::{Deserialize, Serialize};

/// Everything the cleaning pipeline did, step by step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub source: Option<String>,
    pub input_rows: usize,
    pub input_columns: usize,
    pub alphanumeric: AlphanumericStep,
    pub outliers: OutlierStep,
    pub units: UnitStep,
    pub categorical: CategoricalStep,
    pub correlation: CorrelationStep,
    pub output_rows: usize,
    pub output_features: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphanumericStep {
    pub cells_changed: usize,
    pub control_characters_removed: usize,
    pub renamed_columns: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedRow {
    /// 1-based data row number in the table handed to the step.
    pub row: usize,
    pub value: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutlierStep {
    pub target_column: String,
    pub zero_target_removed: usize,
    pub unparseable_target_removed: usize,
    pub removed: Vec<RemovedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconvertibleCell {
    pub column: String,
    pub row: usize,
    pub value: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitStep {
    pub target_unit: String,
    pub columns: Vec<String>,
    pub conversions: usize,
    pub unconvertible: Vec<UnconvertibleCell>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoricalStep {
    pub excluded_columns: Vec<String>,
    pub numeric_columns: Vec<String>,
    /// Numeric candidates that held non-numeric cells and were label-encoded instead.
    pub numeric_fallback_columns: Vec<String>,
    /// `(column, vocabulary size)` for every label-encoded column.
    pub encoded_columns: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub column: String,
    pub reason: String,
    /// `None` when undefined (constant column).
    pub tau: Option<f64>,
    pub partner: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStep {
    pub method: String,
    pub threshold: f64,
    pub columns: Vec<String>,
    /// Pairwise tau-b between the encoded feature columns; `None` where undefined.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub dropped: Vec<DroppedColumn>,
    pub retained: Vec<String>,
}

impl CleaningReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One line per pipeline step.
    pub fn summary(&self) -> Vec<String> {
        vec![
            format!(
                "alphanumeric cleaning: {} cells changed, {} control characters removed, {} columns renamed",
                self.alphanumeric.cells_changed,
                self.alphanumeric.control_characters_removed,
                self.alphanumeric.renamed_columns.len()
            ),
            format!(
                "outlier removal: {} zero-target rows, {} unparseable-target rows removed",
                self.outliers.zero_target_removed, self.outliers.unparseable_target_removed
            ),
            format!(
                "unit normalization: {} cells converted to {}, {} unconvertible",
                self.units.conversions,
                self.units.target_unit,
                self.units.unconvertible.len()
            ),
            format!(
                "categorical encoding: {} encoded, {} numeric, {} excluded",
                self.categorical.encoded_columns.len(),
                self.categorical.numeric_columns.len(),
                self.categorical.excluded_columns.len()
            ),
            format!(
                "correlation pruning (|tau| > {}): dropped {} of {} columns",
                self.correlation.threshold,
                self.correlation.dropped.len(),
                self.correlation.columns.len()
            ),
        ]
    }
}
