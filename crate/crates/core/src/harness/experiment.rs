use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ConfigIdentity, ExperimentConfig};
use super::metrics::{compute_metrics, MetricsTriple};
use super::train::{train_model, EpochMetrics, TrainOptions};
use crate::arch::LayerStack;
use crate::baselines::{
    fit_linear_regression, fit_random_forest, fit_svr, Baseline, ForestParams, SvrParams,
};
use crate::data::{split_dataset, CleanDataset, Split, SplitSpec, Standardizer};
use crate::error::{Error, Result};

/// Test-set outcome of one seed.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub metrics: MetricsTriple,
    /// Empty unless the run was asked to record a trace.
    pub trace: Vec<EpochMetrics>,
    pub test_predictions: Vec<f64>,
    pub test_truth: Vec<f64>,
    pub seconds: f64,
}

/// Aggregate of all seeds of one configuration.
#[derive(Debug, Clone)]
pub struct ResultRecord {
    pub identity: ConfigIdentity,
    /// One slot per planned seed; `None` where the seed failed.
    pub per_seed: Vec<Option<MetricsTriple>>,
    /// Mean over completed seeds.
    pub mean: Option<MetricsTriple>,
    pub seconds: f64,
    pub failures: Vec<String>,
    /// Epoch trace of the first completed seed that recorded one.
    pub trace: Vec<EpochMetrics>,
    /// Test predictions and truth of the first completed seed.
    pub test_predictions: Vec<f64>,
    pub test_truth: Vec<f64>,
}

impl ResultRecord {
    pub fn from_outcomes(identity: ConfigIdentity, outcomes: Vec<Result<SeedOutcome>>) -> Self {
        let mut record = Self {
            identity,
            per_seed: Vec::with_capacity(outcomes.len()),
            mean: None,
            seconds: 0.0,
            failures: Vec::new(),
            trace: Vec::new(),
            test_predictions: Vec::new(),
            test_truth: Vec::new(),
        };
        for outcome in outcomes {
            match outcome {
                Ok(o) => {
                    record.seconds += o.seconds;
                    if record.test_truth.is_empty() {
                        record.test_predictions = o.test_predictions;
                        record.test_truth = o.test_truth;
                    }
                    if record.trace.is_empty() {
                        record.trace = o.trace;
                    }
                    record.per_seed.push(Some(o.metrics));
                }
                Err(e) => {
                    record.failures.push(e.to_string());
                    record.per_seed.push(None);
                }
            }
        }
        let done: Vec<MetricsTriple> = record.per_seed.iter().flatten().copied().collect();
        record.mean = MetricsTriple::mean(&done);
        record
    }

    pub fn completed_seeds(&self) -> usize {
        self.per_seed.iter().flatten().count()
    }

    /// Some but not all seeds failed.
    pub fn is_partial(&self) -> bool {
        let done = self.completed_seeds();
        done > 0 && done < self.per_seed.len()
    }

    pub fn is_failed(&self) -> bool {
        self.completed_seeds() == 0
    }

    /// Test-set residuals `truth - prediction` of the first completed seed.
    pub fn residuals(&self) -> Vec<f64> {
        self.test_truth
            .iter()
            .zip(&self.test_predictions)
            .map(|(t, p)| t - p)
            .collect()
    }
}

/// Seeded split, standardized with training statistics if asked.
pub fn prepare_split(dataset: &CleanDataset, split_seed: u64, standardize: bool) -> Result<Split> {
    let mut split = split_dataset(dataset, &SplitSpec::new(split_seed))?;
    if standardize {
        let scaler = Standardizer::fit(&split.train.features);
        for part in [&mut split.train, &mut split.validation, &mut split.test] {
            part.features = scaler.transform(&part.features);
        }
    }
    Ok(split)
}

/// Trains and evaluates the `index`-th seed of `config`.
pub fn run_seed(
    config: &ExperimentConfig,
    stack: &LayerStack,
    dataset: &CleanDataset,
    index: usize,
    options: TrainOptions,
) -> Result<SeedOutcome> {
    let start = Instant::now();
    let seed = *config
        .seeds
        .get(index)
        .ok_or_else(|| Error::Config(format!("seed index {index} out of range")))?;
    let split = prepare_split(dataset, config.split_seed(index), config.standardize)?;
    let trained = train_model(
        stack,
        config,
        &split.train,
        &split.validation,
        seed,
        options,
    )?;
    let pred = trained.network.predict(&split.test.features)?;
    Ok(SeedOutcome {
        seed,
        metrics: compute_metrics(&pred, &split.test.target)?,
        trace: trained.trace,
        test_predictions: pred,
        test_truth: split.test.target,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Options for seed `index`: only the first seed records an epoch trace.
pub(crate) fn seed_options(index: usize) -> TrainOptions {
    TrainOptions {
        record_trace: index == 0,
        keep_predictions: false,
    }
}

/// Runs every seed of `config` in sequence.
pub fn run_experiment(config: &ExperimentConfig, dataset: &CleanDataset) -> Result<ResultRecord> {
    if config.seeds.is_empty() {
        return Err(Error::Config("experiment has no seeds".into()));
    }
    let stack = config.arch.build(dataset.n_features())?;
    let outcomes = (0..config.seeds.len())
        .map(|i| run_seed(config, &stack, dataset, i, seed_options(i)))
        .collect();
    Ok(ResultRecord::from_outcomes(config.identity(), outcomes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Lr,
    Rf,
    Svr,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [BaselineKind::Lr, BaselineKind::Rf, BaselineKind::Svr];

    /// File-name tag, as in `qq_lr.csv`.
    pub fn tag(self) -> &'static str {
        match self {
            BaselineKind::Lr => "lr",
            BaselineKind::Rf => "rf",
            BaselineKind::Svr => "svr",
        }
    }

    /// Architecture label in result tables.
    pub fn label(self) -> &'static str {
        match self {
            BaselineKind::Lr => "LR",
            BaselineKind::Rf => "RF",
            BaselineKind::Svr => "SVR",
        }
    }

    pub fn fit(self, train: &CleanDataset, seed: u64) -> Result<Baseline> {
        Ok(match self {
            BaselineKind::Lr => Baseline::Lr(fit_linear_regression(train)?),
            BaselineKind::Rf => Baseline::Rf(fit_random_forest(
                train,
                ForestParams {
                    seed,
                    ..ForestParams::default()
                },
            )?),
            BaselineKind::Svr => Baseline::Svr(fit_svr(
                train,
                SvrParams {
                    seed,
                    ..SvrParams::default()
                },
            )?),
        })
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn run_baseline_seed(
    kind: BaselineKind,
    dataset: &CleanDataset,
    seed: u64,
    split_seed: u64,
    standardize: bool,
) -> Result<SeedOutcome> {
    let start = Instant::now();
    let split = prepare_split(dataset, split_seed, standardize)?;
    // the validation rows are not needed for a fixed-hyperparameter fit
    let model = kind.fit(&split.train, seed)?;
    let pred = model.predict(&split.test.features)?;
    Ok(SeedOutcome {
        seed,
        metrics: compute_metrics(&pred, &split.test.target)?,
        trace: Vec::new(),
        test_predictions: pred,
        test_truth: split.test.target,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Fits LR, RF and SVR on the same seeded splits a grid experiment with
/// these seeds would use.
pub fn run_baselines(
    dataset: &CleanDataset,
    seeds: &[u64],
    reshuffle_splits: bool,
    standardize: bool,
) -> Result<Vec<ResultRecord>> {
    if seeds.is_empty() {
        return Err(Error::Config("baseline run has no seeds".into()));
    }
    Ok(BaselineKind::ALL
        .iter()
        .map(|&kind| {
            let outcomes = seeds
                .iter()
                .map(|&seed| {
                    let split_seed = if reshuffle_splits { seed } else { seeds[0] };
                    run_baseline_seed(kind, dataset, seed, split_seed, standardize)
                })
                .collect();
            ResultRecord::from_outcomes(ConfigIdentity::baseline(kind.label()), outcomes)
        })
        .collect())
}
