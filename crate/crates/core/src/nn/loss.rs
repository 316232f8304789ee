use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    Mae,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::Mae => "mae",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "mae" => Ok(LossKind::Mae),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

/// Batch-mean loss and its gradient with respect to each prediction.
///
/// The MAE subgradient at a zero residual is 0.
pub fn loss_value_and_grad(kind: LossKind, pred: &[f64], truth: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != truth.len() {
        return Err(Error::shape(
            format!("{kind} loss"),
            format!("{} predictions vs {} targets", pred.len(), truth.len()),
        ));
    }
    if pred.is_empty() {
        return Err(Error::EmptyBatch("loss_value_and_grad"));
    }
    let n = pred.len() as f64;
    let mut value = 0.0;
    let grad = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| {
            let r = p - t;
            match kind {
                LossKind::Mse => {
                    value += r * r;
                    2.0 * r / n
                }
                LossKind::Mae => {
                    value += r.abs();
                    if r > 0.0 {
                        1.0 / n
                    } else if r < 0.0 {
                        -1.0 / n
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect();
    Ok((value / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let (mse, g) = loss_value_and_grad(LossKind::Mse, &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(mse, 2.5);
        assert_eq!(g, vec![1.0, 2.0]);
        let (mae, g) = loss_value_and_grad(LossKind::Mae, &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(mae, 1.5);
        assert_eq!(g, vec![0.5, 0.5]);
    }

    #[test]
    fn perfect_prediction_is_zero() {
        for kind in [LossKind::Mse, LossKind::Mae] {
            let (v, g) = loss_value_and_grad(kind, &[1.0, -3.0], &[1.0, -3.0]).unwrap();
            assert_eq!(v, 0.0);
            assert!(g.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn empty_batch_is_an_error() {
        assert!(matches!(
            loss_value_and_grad(LossKind::Mse, &[], &[]),
            Err(Error::EmptyBatch(_))
        ));
    }
}
