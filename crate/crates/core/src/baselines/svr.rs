use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::CleanDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub epsilon: f64,
    pub c: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            c: 1.0,
            epochs: 50,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

/// Linear epsilon-insensitive support vector regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub epsilon: f64,
    pub c: f64,
    /// Primal objective after each epoch.
    pub objective_trace: Vec<f64>,
}

impl SvrModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }
}

fn predict(w: &[f64], b: f64, row: &[f64]) -> f64 {
    b + w.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
}

/// `0.5 |w|^2 + C * mean(max(0, |y - f(x)| - eps))`.
fn objective(w: &[f64], b: f64, data: &CleanDataset, eps: f64, c: f64) -> f64 {
    let loss: f64 = data
        .features
        .iter()
        .zip(&data.target)
        .map(|(x, y)| ((y - predict(w, b, x)).abs() - eps).max(0.0))
        .sum();
    0.5 * w.iter().map(|v| v * v).sum::<f64>() + c * loss / data.n_rows() as f64
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Seeded stochastic subgradient descent on the primal objective.
///
/// The step decays as `1/sqrt(epoch)`; an epoch that raises the objective is
/// rolled back and the step halved, so the recorded trace never increases.
pub fn fit_svr(train: &CleanDataset, params: SvrParams) -> Result<SvrModel> {
    let n = train.n_rows();
    if n == 0 {
        return Err(Error::Config("svr needs at least one row".into()));
    }
    if params.epsilon < 0.0 || params.c <= 0.0 || params.learning_rate <= 0.0 {
        return Err(Error::Config(format!("invalid svr parameters {params:?}")));
    }
    let f = train.n_features();
    let mean_sq_norm = train
        .features
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / n as f64;
    let base_step = params.learning_rate / (1.0 + params.c * mean_sq_norm);

    let mut w = vec![0.0; f];
    let mut b = median(&train.target);
    let mut current = objective(&w, b, train, params.epsilon, params.c);
    let mut trace = Vec::with_capacity(params.epochs);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut scale = 1.0;

    for epoch in 0..params.epochs {
        let step = base_step * scale / ((epoch + 1) as f64).sqrt();
        order.shuffle(&mut rng);
        let (mut w_new, mut b_new) = (w.clone(), b);
        for &i in &order {
            let x = &train.features[i];
            let r = train.target[i] - predict(&w_new, b_new, x);
            // subgradient of C * max(0, |r| - eps) with respect to the prediction
            let g = if r > params.epsilon {
                -params.c
            } else if r < -params.epsilon {
                params.c
            } else {
                0.0
            };
            for (wj, xj) in w_new.iter_mut().zip(x) {
                *wj -= step * (*wj + g * xj);
            }
            b_new -= step * g;
        }
        let candidate = objective(&w_new, b_new, train, params.epsilon, params.c);
        if candidate.is_finite() && candidate <= current {
            w = w_new;
            b = b_new;
            current = candidate;
        } else {
            scale *= 0.5;
        }
        trace.push(current);
    }

    Ok(SvrModel {
        weights: w,
        intercept: b,
        epsilon: params.epsilon,
        c: params.c,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    fn line(slope: f64, n: usize, seed: u64) -> CleanDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
        let ys = xs.iter().map(|r| slope * r[0]).collect();
        CleanDataset::from_numeric(xs, ys).unwrap()
    }

    #[test]
    fn wide_tube_needs_no_weights() {
        let ds = line(1.0, 100, 1);
        let m = fit_svr(
            &ds,
            SvrParams {
                epsilon: 5.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.weights[0].abs() < 1e-9);
        assert_eq!(*m.objective_trace.last().unwrap(), 0.0);
    }

    #[test]
    fn recovers_slope_with_large_c() {
        let ds = line(3.0, 200, 2);
        let m = fit_svr(
            &ds,
            SvrParams {
                epsilon: 0.01,
                c: 100.0,
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((m.weights[0] - 3.0).abs() < 0.3, "slope {}", m.weights[0]);
    }

    #[test]
    fn objective_never_increases() {
        let ds = line(-2.0, 150, 4);
        let m = fit_svr(
            &ds,
            SvrParams {
                c: 10.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
