use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::CleanDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }
}

const RIDGE: f64 = 1e-8;

/// Ordinary least squares through the normal equations.
///
/// Columns are centred and scaled before solving and constant columns get a
/// zero coefficient. If the Gram matrix is still not positive definite a ridge
/// of 1e-8 is added to its diagonal.
pub fn fit_linear_regression(train: &CleanDataset) -> Result<LinearModel> {
    let n = train.n_rows();
    let f = train.n_features();
    if n == 0 {
        return Err(Error::Config(
            "linear regression needs at least one row".into(),
        ));
    }
    let y_mean = train.target.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = (0..f)
        .map(|j| train.features.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let sums_sq: Vec<f64> = (0..f)
        .map(|j| {
            train
                .features
                .iter()
                .map(|r| (r[j] - means[j]).powi(2))
                .sum()
        })
        .collect();
    // zero-variance columns carry no signal and are left out of the solve
    let active: Vec<usize> = (0..f).filter(|&j| sums_sq[j] > 0.0).collect();
    let scales: Vec<f64> = active.iter().map(|&j| sums_sq[j].sqrt()).collect();
    let k = active.len();

    let x = DMatrix::from_fn(n, k, |i, a| {
        let j = active[a];
        (train.features[i][j] - means[j]) / scales[a]
    });
    let y = DVector::from_iterator(n, train.target.iter().map(|v| v - y_mean));
    let xt = x.transpose();
    let gram = &xt * &x;
    let rhs = &xt * &y;

    let beta = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => {
            let ridged = gram + DMatrix::identity(k, k) * RIDGE;
            ridged
                .cholesky()
                .ok_or_else(|| Error::Config("normal equations are not solvable".into()))?
                .solve(&rhs)
        }
    };

    let mut coefficients = vec![0.0; f];
    for (a, &j) in active.iter().enumerate() {
        coefficients[j] = beta[a] / scales[a];
    }
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&means)
            .map(|(c, m)| c * m)
            .sum::<f64>();
    if !intercept.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Config(
            "linear regression produced non-finite coefficients".into(),
        ));
    }
    Ok(LinearModel {
        coefficients,
        intercept,
    })
}
