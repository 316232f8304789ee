use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Sigmoid,
    Tanh,
    Relu,
    Identity,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] = [
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
        ActivationKind::Relu,
        ActivationKind::Identity,
    ];

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Identity => x,
        }
    }

    /// Derivative at `x`; relu'(0) is taken as 0.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Relu => "relu",
            ActivationKind::Identity => "identity",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            "relu" => Ok(ActivationKind::Relu),
            "identity" | "linear" => Ok(ActivationKind::Identity),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    // Split on sign so exp never overflows.
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn activation_apply(kind: ActivationKind, x: &Tensor) -> Tensor {
    if kind == ActivationKind::Identity {
        return x.clone();
    }
    x.map(|v| kind.eval(v))
}

/// Multiplies `grad_out` by the activation derivative evaluated at the pre-activation `x`.
pub fn activation_backward(kind: ActivationKind, x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if !x.same_shape(grad_out) {
        return Err(Error::shape(
            format!("{kind} backward"),
            format!("input {:?} vs grad {:?}", x.shape(), grad_out.shape()),
        ));
    }
    if kind == ActivationKind::Identity {
        return Ok(grad_out.clone());
    }
    let mut out = grad_out.clone();
    for (g, &v) in out.data_mut().iter_mut().zip(x.data()) {
        *g *= kind.derivative(v);
    }
    Ok(out)
}
