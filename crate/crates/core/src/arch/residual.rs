use serde::{Deserialize, Serialize};

use super::stack::{ConvDesc, LayerDesc, LayerStack, ResidualBlockDesc};
use crate::error::{Error, Result};
use crate::nn::{ActivationKind, Padding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Bypass carries a width-matching convolution.
    Convolutional,
    /// Bypass is the unmodified input.
    Identity,
}

/// Kernel sizes of the three main-path convolutions in every block.
pub const BOTTLENECK_KERNELS: [usize; 3] = [1, 3, 1];

/// One superblock: a convolutional block followed by `identity_blocks` identity blocks,
/// all with main-path widths `(2^(p-2), 2^(p-2), 2^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub identity_blocks: usize,
    pub width_exponent: u32,
    #[serde(default = "default_stride")]
    pub entry_stride: usize,
}

fn default_stride() -> usize {
    1
}

impl StageSpec {
    pub fn width_triple(&self) -> (u32, u32, u32) {
        let p = self.width_exponent;
        (p - 2, p - 2, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualSpec {
    pub stages: Vec<StageSpec>,
    #[serde(default = "default_activation")]
    pub activation: ActivationKind,
}

fn default_activation() -> ActivationKind {
    ActivationKind::Relu
}

impl ResidualSpec {
    /// Stages with identity-block counts `rs`, widths doubling from `2^first_p`.
    pub fn doubling(rs: &[usize], first_p: u32, entry_stride: usize) -> Self {
        Self {
            stages: rs
                .iter()
                .enumerate()
                .map(|(i, &r)| StageSpec {
                    identity_blocks: r,
                    width_exponent: first_p + i as u32,
                    entry_stride,
                })
                .collect(),
            activation: ActivationKind::Relu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config(
                "residual: at least one superblock required".into(),
            ));
        }
        for (i, stage) in self.stages.iter().enumerate() {
            if !(6..=11).contains(&stage.width_exponent) {
                return Err(Error::Config(format!(
                    "residual: stage {} width exponent p = {} outside [6, 11]",
                    i + 1,
                    stage.width_exponent
                )));
            }
            if !(1..=4).contains(&stage.entry_stride) {
                return Err(Error::Config(format!(
                    "residual: stage {} entry stride {} outside [1, 4]",
                    i + 1,
                    stage.entry_stride
                )));
            }
        }
        for (i, pair) in self.stages.windows(2).enumerate() {
            if pair[1].width_exponent != pair[0].width_exponent + 1 {
                return Err(Error::Config(format!(
                    "residual: stage {} width 2^{} must double stage {} width 2^{}",
                    i + 2,
                    pair[1].width_exponent,
                    i + 1,
                    pair[0].width_exponent
                )));
            }
        }
        Ok(())
    }
}

fn main_path(
    in_channels: usize,
    stage: &StageSpec,
    entry_stride: usize,
    activation: ActivationKind,
) -> Vec<LayerDesc> {
    let (a, b, c) = stage.width_triple();
    let widths = [1usize << a, 1usize << b, 1usize << c];
    let mut layers = Vec::new();
    let mut channels = in_channels;
    for (i, (&filters, &k)) in widths.iter().zip(&BOTTLENECK_KERNELS).enumerate() {
        let stride = if i == 0 { entry_stride } else { 1 };
        // k = 1 needs no padding, which also lets the entry conv take stride > 1
        let padding = if k == 1 {
            Padding::Valid
        } else {
            Padding::Same
        };
        layers.push(LayerDesc::Conv1d(ConvDesc {
            in_channels: channels,
            filters,
            kernel_size: k,
            stride,
            padding,
        }));
        if i < 2 {
            layers.push(LayerDesc::Activation(activation));
        }
        channels = filters;
    }
    layers
}

/// Builds a convolutional block (`bypass = true`) or an identity block.
pub(crate) fn block(
    in_channels: usize,
    stage: &StageSpec,
    kind: BlockKind,
    activation: ActivationKind,
) -> ResidualBlockDesc {
    let entry_stride = match kind {
        BlockKind::Convolutional => stage.entry_stride,
        BlockKind::Identity => 1,
    };
    let bypass = match kind {
        BlockKind::Convolutional => Some(ConvDesc {
            in_channels,
            filters: 1 << stage.width_exponent,
            kernel_size: 1,
            stride: stage.entry_stride,
            padding: Padding::Valid,
        }),
        BlockKind::Identity => None,
    };
    ResidualBlockDesc {
        kind,
        main: main_path(in_channels, stage, entry_stride, activation),
        bypass,
        post_activation: activation,
    }
}

pub fn build_residual_net(spec: &ResidualSpec, input_width: usize) -> Result<LayerStack> {
    spec.validate()?;
    let mut layers = Vec::new();
    let mut channels = 1;
    let mut length = input_width;
    for stage in &spec.stages {
        layers.push(LayerDesc::Residual(block(
            channels,
            stage,
            BlockKind::Convolutional,
            spec.activation,
        )));
        channels = 1 << stage.width_exponent;
        length = (length - 1) / stage.entry_stride + 1;
        for _ in 0..stage.identity_blocks {
            layers.push(LayerDesc::Residual(block(
                channels,
                stage,
                BlockKind::Identity,
                spec.activation,
            )));
        }
    }
    layers.push(LayerDesc::Flatten);
    layers.push(LayerDesc::Dense {
        in_units: channels * length,
        out_units: 1,
    });
    LayerStack::new(vec![1, input_width], layers)
}
