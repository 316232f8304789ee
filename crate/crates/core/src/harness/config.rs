use serde::{Deserialize, Serialize};

use crate::arch::{join_exponents, ArchSpec, MlpFamily};
use crate::nn::LossKind;
use crate::optim::OptimizerConfig;

/// Epoch counts searched by default: 100 to 300 in steps of 50.
pub const EPOCH_SCHEDULE: [usize; 5] = [100, 150, 200, 250, 300];
pub const DEFAULT_BATCH_SIZE: usize = 10;
pub const DEFAULT_SEED_COUNT: usize = 5;

/// `count` consecutive seeds starting at `master`.
pub fn seeds_from_master(master: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| master.wrapping_add(i)).collect()
}

/// One grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub arch: ArchSpec,
    pub optimizer: OptimizerConfig,
    pub loss: LossKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    /// Each seed draws its own train/validation/test split; otherwise every
    /// seed reuses the split of the first seed and only reinitializes weights.
    pub reshuffle_splits: bool,
    /// Z-score features with training-split statistics.
    pub standardize: bool,
}

impl ExperimentConfig {
    pub fn new(arch: ArchSpec, optimizer: OptimizerConfig, loss: LossKind, epochs: usize) -> Self {
        Self {
            arch,
            optimizer,
            loss,
            epochs,
            batch_size: DEFAULT_BATCH_SIZE,
            seeds: seeds_from_master(0, DEFAULT_SEED_COUNT),
            reshuffle_splits: true,
            standardize: false,
        }
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn identity(&self) -> ConfigIdentity {
        ConfigIdentity::of(self)
    }

    /// Seed used to split the data for the `i`-th run.
    pub fn split_seed(&self, i: usize) -> u64 {
        if self.reshuffle_splits {
            self.seeds[i]
        } else {
            self.seeds[0]
        }
    }
}

/// The descriptive columns of a results row.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConfigIdentity {
    pub architecture: String,
    pub loss: String,
    pub kernel: String,
    pub stride: String,
    pub filter_exponents: String,
    pub fc_exponents: String,
    pub optimizer: String,
    pub epochs: String,
}

impl ConfigIdentity {
    pub fn of(config: &ExperimentConfig) -> Self {
        let arch = &config.arch;
        let architecture = format!("{}-{}", arch.family_label(), arch.activation());
        let (kernel, stride, filters, fc) = match arch {
            ArchSpec::Mlp(s) => {
                let fc = match s.family {
                    MlpFamily::Trapezium => format!("{}..{}", s.n, s.n - s.m),
                    MlpFamily::ReverseTrapezium => format!("{}..{}", s.n - s.m, s.n),
                    MlpFamily::Rectangular => format!("{}x{}", s.n, s.m),
                };
                (String::new(), String::new(), String::new(), fc)
            }
            ArchSpec::Cnn(s) => (
                s.kernel_size.to_string(),
                s.stride.to_string(),
                join_exponents(&s.filter_exponents.0),
                format!("{}..{}", s.fc_exponents[0], s.fc_exponents[1]),
            ),
            ArchSpec::Residual(s) => {
                let strides: Vec<String> = s
                    .stages
                    .iter()
                    .map(|st| st.entry_stride.to_string())
                    .collect();
                let triples: Vec<String> = s
                    .stages
                    .iter()
                    .map(|st| {
                        let (a, b, c) = st.width_triple();
                        format!("({a},{b},{c})")
                    })
                    .collect();
                let blocks: Vec<String> = s
                    .stages
                    .iter()
                    .map(|st| st.identity_blocks.to_string())
                    .collect();
                (
                    "1,3,1".to_string(),
                    strides.join(","),
                    triples.join(""),
                    format!("superblocks=({})", blocks.join(",")),
                )
            }
        };
        Self {
            architecture,
            loss: config.loss.to_string(),
            kernel,
            stride,
            filter_exponents: filters,
            fc_exponents: fc,
            optimizer: config.optimizer.kind.to_string(),
            epochs: config.epochs.to_string(),
        }
    }

    /// Identity of a baseline model row.
    pub fn baseline(name: &str) -> Self {
        Self {
            architecture: name.to_string(),
            ..Self::default()
        }
    }

    pub fn label(&self) -> String {
        [
            &self.architecture,
            &self.loss,
            &self.kernel,
            &self.stride,
            &self.filter_exponents,
            &self.fc_exponents,
            &self.optimizer,
            &self.epochs,
        ]
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.as_str())
        .collect::<Vec<_>>()
        .join(" ")
    }
}
