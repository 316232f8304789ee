use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::encode::Vocabularies;
use crate::error::{Error, Result};

/// Name of the target column in cleaned dataset files.
pub const TARGET_COLUMN: &str = "baseresult";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
    pub unit: Option<String>,
}

/// Encoded feature matrix plus target, ready for training.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanDataset {
    pub columns: Vec<ColumnMeta>,
    /// One row per observation.
    pub features: Vec<Vec<f64>>,
    pub target: Vec<f64>,
}

impl CleanDataset {
    pub fn new(
        columns: Vec<ColumnMeta>,
        features: Vec<Vec<f64>>,
        target: Vec<f64>,
    ) -> Result<Self> {
        if features.len() != target.len() {
            return Err(Error::Schema(format!(
                "{} feature rows but {} targets",
                features.len(),
                target.len()
            )));
        }
        if let Some(row) = features.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::Schema(format!(
                "feature row of width {} for {} columns",
                row.len(),
                columns.len()
            )));
        }
        if features
            .iter()
            .flatten()
            .chain(&target)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Schema("non-finite value in dataset".into()));
        }
        Ok(Self {
            columns,
            features,
            target,
        })
    }

    /// A purely numeric dataset with generated column names `x0..`.
    pub fn from_numeric(features: Vec<Vec<f64>>, target: Vec<f64>) -> Result<Self> {
        let width = features.first().map_or(0, Vec::len);
        let columns = (0..width)
            .map(|i| ColumnMeta {
                name: format!("x{i}"),
                kind: ColumnKind::Numeric,
                unit: None,
            })
            .collect();
        Self::new(columns, features, target)
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            columns: self.columns.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            target: indices.iter().map(|&i| self.target[i]).collect(),
        }
    }

    /// Marks columns that have a vocabulary as categorical.
    pub fn apply_vocabularies(&mut self, vocabs: &Vocabularies) {
        for col in &mut self.columns {
            if vocabs.get(&col.name).is_some() {
                col.kind = ColumnKind::Categorical;
            }
        }
    }

    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.column_names();
        header.push(TARGET_COLUMN);
        w.write_record(&header)?;
        for (row, y) in self.features.iter().zip(&self.target) {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            rec.push(format!("{y}"));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    /// Reads a cleaned dataset file; the target column must be `baseresult`.
    pub fn read_csv_from<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let target_idx = header
            .iter()
            .position(|h| h == TARGET_COLUMN)
            .ok_or_else(|| Error::Schema(format!("missing target column {TARGET_COLUMN:?}")))?;
        let columns = header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != target_idx)
            .map(|(_, name)| ColumnMeta {
                name: name.clone(),
                kind: ColumnKind::Numeric,
                unit: None,
            })
            .collect();
        let mut features = Vec::new();
        let mut target = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(header.len() - 1);
            for (i, cell) in rec.iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::Schema(format!(
                        "row {}, column {:?}: {cell:?} is not a number",
                        line + 1,
                        header.get(i).map_or("?", String::as_str)
                    ))
                })?;
                if i == target_idx {
                    target.push(v);
                } else {
                    row.push(v);
                }
            }
            features.push(row);
        }
        Self::new(columns, features, target)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv_from(file)
    }
}

/// Per-column z-scoring fitted on training rows. Constant columns are only centred.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let means: Vec<f64> = (0..width)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let scales = (0..width)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, scales }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let ds = CleanDataset::from_numeric(
            vec![vec![0.1, 1e-300], vec![65536.0, -2.5]],
            vec![0.3, 1.0 / 3.0],
        )
        .unwrap();
        let text = ds.to_csv_string();
        assert!(text.starts_with("x0,x1,baseresult\n"));
        let back = CleanDataset::read_csv_from(text.as_bytes()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn missing_target_column_rejected() {
        assert!(matches!(
            CleanDataset::read_csv_from("a,b\n1,2\n".as_bytes()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn standardizer_centres_and_scales() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&rows);
        assert_eq!(s.transform(&rows), vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }
}
