//! Parametric network families and the layer stacks they expand into.

mod cnn;
mod mlp;
mod residual;
mod stack;

use serde::{Deserialize, Serialize};

pub use cnn::{build_tri_cnn, CnnSpec, FilterExponents};
pub use mlp::{build_mlp, MlpFamily, MlpSpec};
pub use residual::{build_residual_net, BlockKind, ResidualSpec, StageSpec};
pub use stack::{
    enumerate_layer_shapes, ConvDesc, LayerDesc, LayerShape, LayerStack, ResidualBlockDesc,
};

use crate::error::Result;

/// Number of feature columns the generators assume by default.
pub const DEFAULT_INPUT_WIDTH: usize = 24;

/// Any of the three network families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArchSpec {
    Mlp(MlpSpec),
    Cnn(CnnSpec),
    Residual(ResidualSpec),
}

impl ArchSpec {
    pub fn build(&self, input_width: usize) -> Result<LayerStack> {
        match self {
            ArchSpec::Mlp(spec) => build_mlp(spec, input_width),
            ArchSpec::Cnn(spec) => build_tri_cnn(spec, input_width),
            ArchSpec::Residual(spec) => build_residual_net(spec, input_width),
        }
    }

    /// Short family label used in result tables.
    pub fn family_label(&self) -> &'static str {
        match self {
            ArchSpec::Mlp(spec) => match spec.family {
                MlpFamily::Trapezium => "TriMLP",
                MlpFamily::ReverseTrapezium => "RevTriMLP",
                MlpFamily::Rectangular => "RectMLP",
            },
            ArchSpec::Cnn(_) => "TriCNN",
            ArchSpec::Residual(_) => "Residual",
        }
    }

    pub fn activation(&self) -> crate::nn::ActivationKind {
        match self {
            ArchSpec::Mlp(s) => s.activation,
            ArchSpec::Cnn(s) => s.activation,
            ArchSpec::Residual(s) => s.activation,
        }
    }

    pub fn with_activation(mut self, activation: crate::nn::ActivationKind) -> Self {
        match &mut self {
            ArchSpec::Mlp(s) => s.activation = activation,
            ArchSpec::Cnn(s) => s.activation = activation,
            ArchSpec::Residual(s) => s.activation = activation,
        }
        self
    }

    /// Parses a declarative TOML architecture document.
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Renders an exponent list as `9,7` style text.
pub(crate) fn join_exponents(exps: &[u32]) -> String {
    exps.iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
