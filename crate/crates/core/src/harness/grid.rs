use serde::{Deserialize, Serialize};

use super::config::{seeds_from_master, ExperimentConfig, DEFAULT_BATCH_SIZE, DEFAULT_SEED_COUNT};
use crate::arch::{ArchSpec, CnnSpec, MlpFamily, MlpSpec, ResidualSpec};
use crate::error::{Error, Result};
use crate::nn::{ActivationKind, LossKind};
use crate::optim::{OptimizerConfig, OptimizerKind};

/// A scalar or a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn values(&self, path: &str) -> Result<Vec<T>> {
        match self {
            OneOrMany::One(v) => Ok(vec![v.clone()]),
            OneOrMany::Many(v) if v.is_empty() => Err(empty(path)),
            OneOrMany::Many(v) => Ok(v.clone()),
        }
    }
}

fn empty(path: &str) -> Error {
    Error::Config(format!("{path}: empty list"))
}

fn nonempty<T: Clone>(list: &[T], path: &str) -> Result<Vec<T>> {
    if list.is_empty() {
        Err(empty(path))
    } else {
        Ok(list.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpEntry {
    pub family: OneOrMany<MlpFamily>,
    pub n: OneOrMany<u32>,
    pub m: OneOrMany<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnnEntry {
    /// `[9, 7]` or `[[9, 7], [9, 7, 6, 5, 4]]`.
    pub filters: OneOrMany<Vec<u32>>,
    pub kernel: OneOrMany<usize>,
    pub stride: OneOrMany<usize>,
    /// `[9, 5]` or a list of such pairs.
    pub fc: OneOrMany<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualEntry {
    /// Identity blocks per stage, `[2, 5, 5, 2]` or a list of such lists.
    pub superblocks: OneOrMany<Vec<usize>>,
    pub first_width_exponent: OneOrMany<u32>,
    #[serde(default = "one_stride")]
    pub entry_stride: OneOrMany<usize>,
}

fn one_stride() -> OneOrMany<usize> {
    OneOrMany::One(1)
}

/// Declarative search grid. Every list is a dimension of the Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDocument {
    pub epochs: Vec<usize>,
    pub losses: Vec<LossKind>,
    pub optimizers: Vec<OptimizerKind>,
    #[serde(default = "default_activations")]
    pub activations: Vec<ActivationKind>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    /// Number of seeds per configuration, counted up from the master seed.
    #[serde(default = "default_seed_count")]
    pub seeds: usize,
    pub learning_rate: Option<f64>,
    #[serde(default)]
    pub standardize: bool,
    #[serde(default = "yes")]
    pub reshuffle_splits: bool,
    #[serde(default)]
    pub mlp: Vec<MlpEntry>,
    #[serde(default)]
    pub cnn: Vec<CnnEntry>,
    #[serde(default)]
    pub residual: Vec<ResidualEntry>,
}

fn default_activations() -> Vec<ActivationKind> {
    vec![ActivationKind::Relu]
}

fn default_batch_size() -> usize {
    DEFAULT_BATCH_SIZE
}

fn default_seed_count() -> usize {
    DEFAULT_SEED_COUNT
}

fn yes() -> bool {
    true
}

impl GridDocument {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Architectures in document order (mlp, cnn, residual entries), each
    /// entry expanded in field order. Activation is filled in later.
    fn architectures(&self) -> Result<Vec<ArchSpec>> {
        let act = ActivationKind::Relu;
        let mut out = Vec::new();
        for (i, e) in self.mlp.iter().enumerate() {
            let p = format!("mlp[{i}]");
            for family in e.family.values(&format!("{p}.family"))? {
                for n in e.n.values(&format!("{p}.n"))? {
                    for m in e.m.values(&format!("{p}.m"))? {
                        out.push(ArchSpec::Mlp(MlpSpec::new(family, n, m, act)));
                    }
                }
            }
        }
        for (i, e) in self.cnn.iter().enumerate() {
            let p = format!("cnn[{i}]");
            for filters in e.filters.values(&format!("{p}.filters"))? {
                if filters.is_empty() {
                    return Err(empty(&format!("{p}.filters")));
                }
                for k in e.kernel.values(&format!("{p}.kernel"))? {
                    for s in e.stride.values(&format!("{p}.stride"))? {
                        for fc in e.fc.values(&format!("{p}.fc"))? {
                            out.push(ArchSpec::Cnn(CnnSpec::new(&filters, k, s, fc, act)));
                        }
                    }
                }
            }
        }
        for (i, e) in self.residual.iter().enumerate() {
            let p = format!("residual[{i}]");
            for blocks in e.superblocks.values(&format!("{p}.superblocks"))? {
                if blocks.is_empty() {
                    return Err(empty(&format!("{p}.superblocks")));
                }
                for w in e
                    .first_width_exponent
                    .values(&format!("{p}.first_width_exponent"))?
                {
                    for s in e.entry_stride.values(&format!("{p}.entry_stride"))? {
                        out.push(ArchSpec::Residual(ResidualSpec::doubling(&blocks, w, s)));
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::Config(
                "grid: no architectures (add [[mlp]], [[cnn]] or [[residual]] entries)".into(),
            ));
        }
        Ok(out)
    }
}

/// A grid point dropped because its architecture cannot be built.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub label: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridExpansion {
    pub configs: Vec<ExperimentConfig>,
    pub exclusions: Vec<Exclusion>,
}

/// Cartesian product of the grid, in a fixed order: architecture, activation,
/// loss, optimizer, epochs. Architectures that fail to build on
/// `input_width` features are excluded.
pub fn enumerate_grid(
    doc: &GridDocument,
    master_seed: u64,
    input_width: usize,
) -> Result<GridExpansion> {
    let epochs = nonempty(&doc.epochs, "epochs")?;
    let losses = nonempty(&doc.losses, "losses")?;
    let optimizers = nonempty(&doc.optimizers, "optimizers")?;
    let activations = nonempty(&doc.activations, "activations")?;
    if doc.batch_size == 0 {
        return Err(Error::Config("batch_size: must be positive".into()));
    }
    if doc.seeds == 0 {
        return Err(Error::Config("seeds: must be positive".into()));
    }
    let seeds = seeds_from_master(master_seed, doc.seeds);
    let mut configs = Vec::new();
    let mut exclusions = Vec::new();
    for arch in doc.architectures()? {
        for &act in &activations {
            let arch = arch.clone().with_activation(act);
            let feasible = arch.build(input_width).err();
            for &loss in &losses {
                for &kind in &optimizers {
                    let mut optimizer = OptimizerConfig::new(kind);
                    if let Some(lr) = doc.learning_rate {
                        optimizer = optimizer.with_learning_rate(lr);
                    }
                    optimizer
                        .validate()
                        .map_err(|e| Error::Config(format!("learning_rate: {e}")))?;
                    for &ep in &epochs {
                        let mut cfg = ExperimentConfig::new(arch.clone(), optimizer, loss, ep)
                            .with_seeds(seeds.clone());
                        cfg.batch_size = doc.batch_size;
                        cfg.standardize = doc.standardize;
                        cfg.reshuffle_splits = doc.reshuffle_splits;
                        match &feasible {
                            None => configs.push(cfg),
                            Some(e) => exclusions.push(Exclusion {
                                label: cfg.identity().label(),
                                reason: e.to_string(),
                            }),
                        }
                    }
                }
            }
        }
    }
    Ok(GridExpansion {
        configs,
        exclusions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epochs_times_strides() {
        let doc = GridDocument::from_toml(
            r#"
            epochs = [100, 150]
            losses = ["mae"]
            optimizers = ["adam"]
            [[cnn]]
            filters = [9, 7]
            kernel = 3
            stride = [1, 2]
            fc = [9, 5]
            "#,
        )
        .unwrap();
        let g = enumerate_grid(&doc, 0, 24).unwrap();
        assert_eq!(g.configs.len(), 4);
        assert!(g.exclusions.is_empty());
        assert_eq!(g.configs[0].epochs, 100);
        assert_eq!(g.configs[1].epochs, 150);
        assert_eq!(g.configs[0].seeds, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn infeasible_depth_is_excluded() {
        let doc = GridDocument::from_toml(
            r#"
            epochs = [100]
            losses = ["mse"]
            optimizers = ["sgd"]
            [[cnn]]
            filters = [[9, 7], [9, 7, 6, 5, 4]]
            kernel = 3
            stride = 2
            fc = [9, 5]
            "#,
        )
        .unwrap();
        let g = enumerate_grid(&doc, 0, 24).unwrap();
        assert_eq!(g.configs.len(), 1);
        assert_eq!(g.exclusions.len(), 1);
        assert!(
            g.exclusions[0].reason.contains("conv layer"),
            "{}",
            g.exclusions[0].reason
        );
    }

    #[test]
    fn empty_dimension_is_an_error() {
        let doc = GridDocument::from_toml(
            r#"
            epochs = []
            losses = ["mse"]
            optimizers = ["sgd"]
            [[mlp]]
            family = "trapezium"
            n = 6
            m = 3
            "#,
        )
        .unwrap();
        let err = enumerate_grid(&doc, 0, 24).unwrap_err().to_string();
        assert!(err.contains("epochs"), "{err}");

        let doc = GridDocument::from_toml(
            r#"
            epochs = [1]
            losses = ["mse"]
            optimizers = ["sgd"]
            [[mlp]]
            family = "trapezium"
            n = []
            m = 3
            "#,
        )
        .unwrap();
        let err = enumerate_grid(&doc, 0, 24).unwrap_err().to_string();
        assert!(err.contains("mlp[0].n"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = GridDocument::from_toml(
            "epochs=[1]\nlosses=[\"mse\"]\noptimizers=[\"adam\"]\nbogus=1\n",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn residual_entry_expands() {
        let doc = GridDocument::from_toml(
            r#"
            epochs = [10]
            losses = ["mae"]
            optimizers = ["rmsprop"]
            activations = ["relu", "tanh"]
            [[residual]]
            superblocks = [2, 5, 5, 2]
            first_width_exponent = 8
            "#,
        )
        .unwrap();
        let g = enumerate_grid(&doc, 3, 24).unwrap();
        assert_eq!(g.configs.len(), 2);
        assert_eq!(g.configs[1].arch.activation(), ActivationKind::Tanh);
        assert_eq!(g.configs[0].seeds[0], 3);
    }
}
