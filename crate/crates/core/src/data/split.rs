use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::CleanDataset;
use crate::error::{Error, Result};

/// 80/20 train/test, then 80/20 train/validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub validation_fraction_of_train: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            test_fraction: 0.2,
            validation_fraction_of_train: 0.2,
            seed,
        }
    }
}

/// Minimum number of rows [`split_dataset`] accepts.
pub const MIN_SPLIT_ROWS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: CleanDataset,
    pub validation: CleanDataset,
    pub test: CleanDataset,
}

impl SplitIndices {
    /// Seeded shuffle; the last `test_fraction` of rows become the test set, and
    /// the last `validation_fraction_of_train` of the remainder the validation set.
    pub fn new(rows: usize, spec: &SplitSpec) -> Result<Self> {
        if rows < MIN_SPLIT_ROWS {
            return Err(Error::Config(format!(
                "need at least {MIN_SPLIT_ROWS} rows to split, got {rows}"
            )));
        }
        let mut order: Vec<usize> = (0..rows).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
        let n_test = (rows as f64 * spec.test_fraction).round() as usize;
        let rest = rows - n_test;
        let n_val = (rest as f64 * spec.validation_fraction_of_train).round() as usize;
        let n_train = rest - n_val;
        Ok(Self {
            train: order[..n_train].to_vec(),
            validation: order[n_train..rest].to_vec(),
            test: order[rest..].to_vec(),
        })
    }
}

pub fn split_dataset(dataset: &CleanDataset, spec: &SplitSpec) -> Result<Split> {
    let idx = SplitIndices::new(dataset.n_rows(), spec)?;
    Ok(Split {
        train: dataset.subset(&idx.train),
        validation: dataset.subset(&idx.validation),
        test: dataset.subset(&idx.test),
    })
}
