use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{conv_output_length, ActivationKind, Padding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvDesc {
    pub in_channels: usize,
    pub filters: usize,
    pub kernel_size: usize,
    pub stride: usize,
    pub padding: Padding,
}

impl ConvDesc {
    fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input.len() != 2 || input[0] != self.in_channels {
            return Err(Error::Config(format!(
                "{self} expects ({}, length) input, got {input:?}",
                self.in_channels
            )));
        }
        let len = conv_output_length(input[1], self.kernel_size, self.stride, self.padding)
            .ok_or_else(|| {
                Error::Config(format!(
                    "{self} cannot consume sequence of length {} (needs at least {})",
                    input[1], self.kernel_size
                ))
            })?;
        Ok(vec![self.filters, len])
    }
}

impl fmt::Display for ConvDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "conv1d {}->{} k={} s={} {:?}",
            self.in_channels, self.filters, self.kernel_size, self.stride, self.padding
        )
    }
}

/// A residual unit: `post(main(x) + bypass(x))`. Identity blocks have no bypass layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualBlockDesc {
    pub kind: super::BlockKind,
    pub main: Vec<LayerDesc>,
    pub bypass: Option<ConvDesc>,
    pub post_activation: ActivationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerDesc {
    Dense { in_units: usize, out_units: usize },
    Conv1d(ConvDesc),
    Activation(ActivationKind),
    Flatten,
    Residual(ResidualBlockDesc),
}

impl LayerDesc {
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match self {
            LayerDesc::Dense {
                in_units,
                out_units,
            } => {
                if input != [*in_units] {
                    return Err(Error::Config(format!(
                        "dense {in_units}->{out_units} given input {input:?}"
                    )));
                }
                Ok(vec![*out_units])
            }
            LayerDesc::Conv1d(c) => c.output_shape(input),
            LayerDesc::Activation(_) => Ok(input.to_vec()),
            LayerDesc::Flatten => {
                if input.len() != 2 {
                    return Err(Error::Config(format!(
                        "flatten expects a rank-2 input, got {input:?}"
                    )));
                }
                Ok(vec![input[0] * input[1]])
            }
            LayerDesc::Residual(block) => {
                let mut shape = input.to_vec();
                for layer in &block.main {
                    shape = layer.output_shape(&shape)?;
                }
                let skip = match &block.bypass {
                    Some(c) => c.output_shape(input)?,
                    None => input.to_vec(),
                };
                if skip != shape {
                    return Err(Error::Config(format!(
                        "{:?} block: main path produces {shape:?} but bypass produces {skip:?}",
                        block.kind
                    )));
                }
                Ok(shape)
            }
        }
    }

    fn label(&self) -> String {
        match self {
            LayerDesc::Dense {
                in_units,
                out_units,
            } => format!("dense {in_units}->{out_units}"),
            LayerDesc::Conv1d(c) => c.to_string(),
            LayerDesc::Activation(a) => a.to_string(),
            LayerDesc::Flatten => "flatten".into(),
            LayerDesc::Residual(b) => {
                let widths: Vec<String> = b
                    .main
                    .iter()
                    .filter_map(|l| match l {
                        LayerDesc::Conv1d(c) => Some(c.filters.to_string()),
                        _ => None,
                    })
                    .collect();
                format!("{:?} block ({})", b.kind, widths.join(", ")).to_lowercase()
            }
        }
    }
}

/// A shape-checked, ordered list of layers ending in one linear output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    input_shape: Vec<usize>,
    layers: Vec<LayerDesc>,
}

/// One row of [`enumerate_layer_shapes`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerShape {
    pub label: String,
    pub shape: Vec<usize>,
}

impl LayerStack {
    pub fn new(input_shape: Vec<usize>, layers: Vec<LayerDesc>) -> Result<Self> {
        let stack = Self {
            input_shape,
            layers,
        };
        let shapes = enumerate_layer_shapes(&stack, &stack.input_shape)?;
        if shapes.last().map(|s| s.shape.as_slice()) != Some(&[1]) {
            return Err(Error::Config(
                "stack must end in a single output unit".into(),
            ));
        }
        if !matches!(
            stack.layers.last(),
            Some(LayerDesc::Dense { out_units: 1, .. })
        ) {
            return Err(Error::Config(
                "stack must end in a linear single-unit dense layer".into(),
            ));
        }
        Ok(stack)
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layers(&self) -> &[LayerDesc] {
        &self.layers
    }

    /// Output widths of the top-level dense layers, in order.
    pub fn dense_widths(&self) -> Vec<usize> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                LayerDesc::Dense { out_units, .. } => Some(*out_units),
                _ => None,
            })
            .collect()
    }

    /// Filter counts of the top-level convolution layers, in order.
    pub fn conv_widths(&self) -> Vec<usize> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                LayerDesc::Conv1d(c) => Some(c.filters),
                _ => None,
            })
            .collect()
    }

    pub fn residual_blocks(&self) -> Vec<&ResidualBlockDesc> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                LayerDesc::Residual(b) => Some(b),
                _ => None,
            })
            .collect()
    }

    /// Every layer with its output shape, activations included.
    pub fn describe(&self) -> Result<Vec<LayerShape>> {
        let mut shape = self.input_shape.clone();
        let mut rows = vec![LayerShape {
            label: "input".into(),
            shape: shape.clone(),
        }];
        for layer in &self.layers {
            shape = layer.output_shape(&shape)?;
            rows.push(LayerShape {
                label: layer.label(),
                shape: shape.clone(),
            });
        }
        Ok(rows)
    }
}

/// Input shape followed by the output shape of every shape-changing layer
/// (activations are skipped since they preserve shape).
pub fn enumerate_layer_shapes(
    stack: &LayerStack,
    input_shape: &[usize],
) -> Result<Vec<LayerShape>> {
    let mut shape = input_shape.to_vec();
    let mut out = vec![LayerShape {
        label: "input".into(),
        shape: shape.clone(),
    }];
    for (i, layer) in stack.layers.iter().enumerate() {
        shape = layer.output_shape(&shape).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("layer {i}: {msg}")),
            other => other,
        })?;
        if !matches!(layer, LayerDesc::Activation(_)) {
            out.push(LayerShape {
                label: layer.label(),
                shape: shape.clone(),
            });
        }
    }
    Ok(out)
}
