use serde::{Deserialize, Serialize};

use super::join_exponents;
use super::stack::{ConvDesc, LayerDesc, LayerStack};
use crate::error::{Error, Result};
use crate::nn::{conv_output_length, ActivationKind, Padding};

/// Convolution widths as powers of two.
///
/// Two exponents `(hi, lo)` mean every exponent from `hi` down to `lo`;
/// any other length is taken verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FilterExponents(pub Vec<u32>);

impl FilterExponents {
    pub fn expanded(&self) -> Vec<u32> {
        match self.0.as_slice() {
            [hi, lo] if hi >= lo => (*lo..=*hi).rev().collect(),
            other => other.to_vec(),
        }
    }
}

/// Trapezium-shaped 1D CNN: conv stack, flatten, halving dense stack, one output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnnSpec {
    pub filter_exponents: FilterExponents,
    pub kernel_size: usize,
    pub stride: usize,
    /// `[p, p - q]`: dense widths halve from `2^p` to `2^(p-q)`.
    pub fc_exponents: [u32; 2],
    #[serde(default = "default_activation")]
    pub activation: ActivationKind,
}

fn default_activation() -> ActivationKind {
    ActivationKind::Relu
}

impl CnnSpec {
    pub fn new(
        filter_exponents: &[u32],
        kernel_size: usize,
        stride: usize,
        fc_exponents: [u32; 2],
        activation: ActivationKind,
    ) -> Self {
        Self {
            filter_exponents: FilterExponents(filter_exponents.to_vec()),
            kernel_size,
            stride,
            fc_exponents,
            activation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=5).contains(&self.kernel_size) {
            return Err(Error::Config(format!(
                "cnn: kernel size {} outside [2, 5]",
                self.kernel_size
            )));
        }
        if !(1..=4).contains(&self.stride) {
            return Err(Error::Config(format!(
                "cnn: stride {} outside [1, 4]",
                self.stride
            )));
        }
        let exps = self.filter_exponents.expanded();
        if exps.is_empty() {
            return Err(Error::Config("cnn: no convolution layers".into()));
        }
        if exps.windows(2).any(|w| w[1] >= w[0]) || exps.iter().any(|&e| e > 16) {
            return Err(Error::Config(format!(
                "cnn: filter exponents ({}) must be strictly descending and at most 16",
                join_exponents(&self.filter_exponents.0)
            )));
        }
        let [p, lo] = self.fc_exponents;
        if lo < 1 || p < lo || p > 16 {
            return Err(Error::Config(format!(
                "cnn: dense exponents [{p}, {lo}] need p >= p - q >= 1"
            )));
        }
        Ok(())
    }

    pub fn conv_widths(&self) -> Vec<usize> {
        self.filter_exponents
            .expanded()
            .into_iter()
            .map(|e| 1usize << e)
            .collect()
    }

    pub fn fc_widths(&self) -> Vec<usize> {
        let [p, lo] = self.fc_exponents;
        (lo..=p).rev().map(|e| 1usize << e).collect()
    }
}

pub fn build_tri_cnn(spec: &CnnSpec, input_width: usize) -> Result<LayerStack> {
    spec.validate()?;
    let mut layers = Vec::new();
    let mut channels = 1;
    let mut length = input_width;
    for (i, filters) in spec.conv_widths().into_iter().enumerate() {
        length = conv_output_length(length, spec.kernel_size, spec.stride, Padding::Valid)
            .ok_or_else(|| {
                Error::Config(format!(
                    "cnn: conv layer {} ({filters} filters) receives length {length}, \
                     shorter than kernel size {}",
                    i + 1,
                    spec.kernel_size
                ))
            })?;
        layers.push(LayerDesc::Conv1d(ConvDesc {
            in_channels: channels,
            filters,
            kernel_size: spec.kernel_size,
            stride: spec.stride,
            padding: Padding::Valid,
        }));
        layers.push(LayerDesc::Activation(spec.activation));
        channels = filters;
    }
    layers.push(LayerDesc::Flatten);
    let mut width = channels * length;
    for out in spec.fc_widths() {
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
    LayerStack::new(vec![1, input_width], layers)
}
