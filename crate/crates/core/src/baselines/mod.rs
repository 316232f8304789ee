//! Classical comparison models: least squares, random forest and linear SVR.

mod forest;
mod linear;
mod svr;

use serde::{Deserialize, Serialize};

pub use forest::{fit_random_forest, ForestModel, ForestParams, RegressionTree, TreeNode};
pub use linear::{fit_linear_regression, LinearModel};
pub use svr::{fit_svr, SvrModel, SvrParams};

use crate::error::{Error, Result};

/// Version tag written into serialized baseline documents.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Any fitted baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Baseline {
    Lr(LinearModel),
    Rf(ForestModel),
    Svr(SvrModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineDocument {
    pub version: u32,
    #[serde(flatten)]
    pub model: Baseline,
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Lr(_) => "lr",
            Baseline::Rf(_) => "rf",
            Baseline::Svr(_) => "svr",
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Baseline::Lr(m) => m.coefficients.len(),
            Baseline::Rf(m) => m.n_features,
            Baseline::Svr(m) => m.weights.len(),
        }
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let width = self.n_features();
        if let Some(row) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::shape(
                format!("{} predict", self.name()),
                format!("model has {width} features, row has {}", row.len()),
            ));
        }
        Ok(rows
            .iter()
            .map(|r| match self {
                Baseline::Lr(m) => m.predict_row(r),
                Baseline::Rf(m) => m.predict_row(r),
                Baseline::Svr(m) => m.predict_row(r),
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BaselineDocument {
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })
        .expect("baseline serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BaselineDocument = serde_json::from_str(text)?;
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model document version {}",
                doc.version
            )));
        }
        Ok(doc.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_predicts_and_checks_width() {
        let m = Baseline::Lr(LinearModel {
            coefficients: vec![2.0],
            intercept: 1.0,
        });
        assert_eq!(m.predict(&[vec![3.0]]).unwrap(), vec![7.0]);
        assert!(m.predict(&[]).unwrap().is_empty());
        assert!(m.predict(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn document_round_trip() {
        let m = Baseline::Svr(SvrModel {
            weights: vec![0.5, -1.0],
            intercept: 0.25,
            epsilon: 0.1,
            c: 1.0,
            objective_trace: vec![3.0, 2.0],
        });
        let text = m.to_json();
        assert!(text.contains("\"version\": 1"));
        assert_eq!(Baseline::from_json(&text).unwrap(), m);
    }
}
