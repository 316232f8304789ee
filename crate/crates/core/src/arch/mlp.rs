use serde::{Deserialize, Serialize};

use super::stack::{LayerDesc, LayerStack};
use crate::error::{Error, Result};
use crate::nn::ActivationKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlpFamily {
    Trapezium,
    ReverseTrapezium,
    Rectangular,
}

/// Fully-connected family. `n` sets the widest layer (`2^n`), `m` the depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSpec {
    pub family: MlpFamily,
    pub n: u32,
    pub m: u32,
    #[serde(default = "default_activation")]
    pub activation: ActivationKind,
}

fn default_activation() -> ActivationKind {
    ActivationKind::Relu
}

impl MlpSpec {
    pub fn new(family: MlpFamily, n: u32, m: u32, activation: ActivationKind) -> Self {
        Self {
            family,
            n,
            m,
            activation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(4..=11).contains(&self.n) {
            return Err(Error::Config(format!(
                "mlp: n = {} outside [4, 11]",
                self.n
            )));
        }
        if !(1..=10).contains(&self.m) {
            return Err(Error::Config(format!(
                "mlp: m = {} outside [1, 10]",
                self.m
            )));
        }
        if self.family != MlpFamily::Rectangular && self.n <= self.m + 1 {
            return Err(Error::Config(format!(
                "mlp: trapezium networks need n - m > 1, got n = {}, m = {}",
                self.n, self.m
            )));
        }
        Ok(())
    }

    /// Hidden-layer widths, excluding the single output unit.
    pub fn hidden_widths(&self) -> Vec<usize> {
        let halving = (self.n - self.m..=self.n).rev().map(|e| 1usize << e);
        match self.family {
            MlpFamily::Trapezium => halving.collect(),
            MlpFamily::ReverseTrapezium => {
                let mut w: Vec<_> = halving.collect();
                w.reverse();
                w
            }
            MlpFamily::Rectangular => vec![1usize << self.n; self.m as usize],
        }
    }
}

pub fn build_mlp(spec: &MlpSpec, input_width: usize) -> Result<LayerStack> {
    spec.validate()?;
    if input_width == 0 {
        return Err(Error::Config("mlp: input width must be positive".into()));
    }
    let mut layers = Vec::new();
    let mut width = input_width;
    for out in spec.hidden_widths() {
        layers.push(LayerDesc::Dense {
            in_units: width,
            out_units: out,
        });
        layers.push(LayerDesc::Activation(spec.activation));
        width = out;
    }
    layers.push(LayerDesc::Dense {
        in_units: width,
        out_units: 1,
    });
    LayerStack::new(vec![input_width], layers)
}
