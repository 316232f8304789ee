//! Per-mini-batch parameter update rules: SGD, RMSprop and Adam.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Rmsprop,
    Adam,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Rmsprop => "rmsprop",
            OptimizerKind::Adam => "adam",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "rmsprop" => Ok(OptimizerKind::Rmsprop),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::Config(format!("unknown optimizer {other:?}"))),
        }
    }
}

/// Optimizer kind plus hyperparameters. Fields not used by a kind are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub rho: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::new(OptimizerKind::Adam)
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            learning_rate: 0.001,
            rho: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn with_learning_rate(mut self, lr: f64) -> Self {
        self.learning_rate = lr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.rho)
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid optimizer settings {self:?}"
            )))
        }
    }
}

/// Accumulators for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    /// Adam first moment.
    pub m: Vec<f64>,
    /// RMSprop / Adam second moment.
    pub v: Vec<f64>,
    /// Adam step counter.
    pub t: u64,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, len: usize) -> Self {
        let m = match config.kind {
            OptimizerKind::Adam => vec![0.0; len],
            _ => Vec::new(),
        };
        let v = match config.kind {
            OptimizerKind::Sgd => Vec::new(),
            _ => vec![0.0; len],
        };
        Self { config, m, v, t: 0 }
    }

    pub fn for_param(config: OptimizerConfig, param: &Tensor) -> Self {
        Self::new(config, param.len())
    }

    pub fn step(&mut self, param: &mut Tensor, grad: &Tensor) -> Result<()> {
        match self.config.kind {
            OptimizerKind::Sgd => sgd_step(param, grad, self),
            OptimizerKind::Rmsprop => rmsprop_step(param, grad, self),
            OptimizerKind::Adam => adam_step(param, grad, self),
        }
    }
}

fn check(op: &str, param: &Tensor, grad: &Tensor, state_len: usize) -> Result<()> {
    if !param.same_shape(grad) {
        return Err(Error::shape(
            op,
            format!("param {:?} vs grad {:?}", param.shape(), grad.shape()),
        ));
    }
    if state_len != param.len() {
        return Err(Error::shape(
            op,
            format!("state holds {state_len} slots for {} values", param.len()),
        ));
    }
    Ok(())
}

/// `param -= lr * grad`.
pub fn sgd_step(param: &mut Tensor, grad: &Tensor, state: &OptimizerState) -> Result<()> {
    check("sgd_step", param, grad, param.len())?;
    let lr = state.config.learning_rate;
    for (p, g) in param.data_mut().iter_mut().zip(grad.data()) {
        *p -= lr * g;
    }
    Ok(())
}

pub fn rmsprop_step(param: &mut Tensor, grad: &Tensor, state: &mut OptimizerState) -> Result<()> {
    check("rmsprop_step", param, grad, state.v.len())?;
    let OptimizerConfig {
        learning_rate: lr,
        rho,
        epsilon: eps,
        ..
    } = state.config;
    for ((p, g), v) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(state.v.iter_mut())
    {
        *v = rho * *v + (1.0 - rho) * g * g;
        *p -= lr * g / (v.sqrt() + eps);
    }
    Ok(())
}

pub fn adam_step(param: &mut Tensor, grad: &Tensor, state: &mut OptimizerState) -> Result<()> {
    check("adam_step", param, grad, state.v.len())?;
    check("adam_step", param, grad, state.m.len())?;
    let OptimizerConfig {
        learning_rate: lr,
        beta1,
        beta2,
        epsilon: eps,
        ..
    } = state.config;
    state.t += 1;
    let t = i32::try_from(state.t).unwrap_or(i32::MAX);
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (((p, g), m), v) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}
