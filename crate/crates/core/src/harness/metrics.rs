use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Test-set quality of one model. `r2` is `None` when the truth is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsTriple {
    pub r2: Option<f64>,
    pub mae: f64,
    pub mse: f64,
}

impl MetricsTriple {
    /// Arithmetic mean of each field; `r2` is undefined if any input's is.
    pub fn mean(items: &[MetricsTriple]) -> Option<MetricsTriple> {
        if items.is_empty() {
            return None;
        }
        let n = items.len() as f64;
        let r2 = items
            .iter()
            .map(|m| m.r2)
            .sum::<Option<f64>>()
            .map(|s| s / n);
        Some(MetricsTriple {
            r2,
            mae: items.iter().map(|m| m.mae).sum::<f64>() / n,
            mse: items.iter().map(|m| m.mse).sum::<f64>() / n,
        })
    }
}

/// MSE, MAE and `R^2 = 1 - SS_res / SS_tot`.
pub fn compute_metrics(pred: &[f64], truth: &[f64]) -> Result<MetricsTriple> {
    if pred.len() != truth.len() {
        return Err(Error::shape(
            "compute_metrics",
            format!("{} predictions vs {} targets", pred.len(), truth.len()),
        ));
    }
    if pred.is_empty() {
        return Err(Error::EmptyBatch("compute_metrics"));
    }
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut abs = 0.0;
    let mut ss_tot = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        let r = t - p;
        ss_res += r * r;
        abs += r.abs();
        ss_tot += (t - mean) * (t - mean);
    }
    let constant = truth.iter().all(|&t| t == truth[0]);
    Ok(MetricsTriple {
        r2: (!constant).then(|| 1.0 - ss_res / ss_tot),
        mae: abs / n,
        mse: ss_res / n,
    })
}
