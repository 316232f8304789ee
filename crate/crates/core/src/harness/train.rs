use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{compute_metrics, MetricsTriple};
use crate::arch::LayerStack;
use crate::data::CleanDataset;
use crate::error::{Error, Result};
use crate::model::{Network, Optimizer};
use crate::nn::loss_value_and_grad;
use crate::tensor::Tensor;

/// RNG stream used for weight initialization; splits use stream 0.
pub(crate) const INIT_STREAM: u64 = 1;
/// RNG stream used for the per-epoch row shuffle.
pub(crate) const SHUFFLE_STREAM: u64 = 2;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainOptions {
    /// Evaluate train and validation metrics after every epoch.
    pub record_trace: bool,
    /// Keep the per-epoch predictions alongside the metrics.
    pub keep_predictions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    pub train: MetricsTriple,
    pub validation: MetricsTriple,
    #[serde(skip)]
    pub train_predictions: Option<Vec<f64>>,
    #[serde(skip)]
    pub validation_predictions: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub network: Network,
    pub trace: Vec<EpochMetrics>,
}

/// Mini-batch training with a fixed epoch count. Validation data is only
/// evaluated, never used to steer training.
pub fn train_model(
    stack: &LayerStack,
    config: &ExperimentConfig,
    train: &CleanDataset,
    validation: &CleanDataset,
    seed: u64,
    options: TrainOptions,
) -> Result<TrainedModel> {
    config.optimizer.validate()?;
    if config.batch_size == 0 {
        return Err(Error::Config("batch_size must be positive".into()));
    }
    if train.n_rows() == 0 {
        return Err(Error::EmptyBatch("train_model"));
    }
    let mut network = Network::init(stack, &mut stream_rng(seed, INIT_STREAM));
    let mut optimizer = Optimizer::new(config.optimizer, &mut network);
    let mut shuffle_rng = stream_rng(seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    let mut caches: Vec<Vec<Tensor>> = vec![Vec::new(); config.batch_size];
    let mut preds = Vec::with_capacity(config.batch_size);
    let mut truth = Vec::with_capacity(config.batch_size);
    let mut trace = Vec::new();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            preds.clear();
            truth.clear();
            for (&row, cache) in batch.iter().zip(caches.iter_mut()) {
                cache.clear();
                preds.push(network.forward_row(&train.features[row], cache)?);
                truth.push(train.target[row]);
            }
            let (loss, grads) = loss_value_and_grad(config.loss, &preds, &truth)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    config: config.identity().label(),
                    epoch,
                    batch: b + 1,
                    loss,
                });
            }
            network.zero_grad();
            for (g, cache) in grads.iter().zip(caches.iter_mut()) {
                network.backward_row(*g, cache)?;
            }
            optimizer.step(&mut network)?;
        }
        if options.record_trace {
            let tp = network.predict(&train.features)?;
            let vp = network.predict(&validation.features)?;
            trace.push(EpochMetrics {
                epoch,
                train: compute_metrics(&tp, &train.target)?,
                validation: compute_metrics(&vp, &validation.target)?,
                train_predictions: options.keep_predictions.then_some(tp),
                validation_predictions: options.keep_predictions.then_some(vp),
            });
        }
    }
    Ok(TrainedModel { network, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{ArchSpec, MlpFamily, MlpSpec};
    use crate::nn::{ActivationKind, LossKind};
    use crate::optim::{OptimizerConfig, OptimizerKind};
    use rand::Rng;

    fn sum_dataset(rows: usize, width: usize, seed: u64) -> CleanDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let target = features.iter().map(|r| r.iter().sum()).collect();
        CleanDataset::from_numeric(features, target).unwrap()
    }

    fn config(epochs: usize) -> ExperimentConfig {
        ExperimentConfig::new(
            ArchSpec::Mlp(MlpSpec::new(
                MlpFamily::Trapezium,
                4,
                2,
                ActivationKind::Relu,
            )),
            OptimizerConfig::new(OptimizerKind::Adam),
            LossKind::Mse,
            epochs,
        )
    }

    #[test]
    fn training_reduces_train_error() {
        let data = sum_dataset(500, 6, 3);
        let cfg = config(5);
        let stack = cfg.arch.build(6).unwrap();
        let untrained = train_model(&stack, &config(0), &data, &data, 7, TrainOptions::default())
            .unwrap()
            .network;
        let before =
            compute_metrics(&untrained.predict(&data.features).unwrap(), &data.target).unwrap();
        let opts = TrainOptions {
            record_trace: true,
            keep_predictions: false,
        };
        let trained = train_model(&stack, &cfg, &data, &data, 7, opts).unwrap();
        assert_eq!(trained.trace.len(), 5);
        assert!(trained.trace[4].train.mse < before.mse);
    }

    #[test]
    fn zero_epochs_keeps_initialization() {
        let data = sum_dataset(40, 6, 1);
        let stack = config(0).arch.build(6).unwrap();
        let mut a = train_model(
            &stack,
            &config(0),
            &data,
            &data,
            11,
            TrainOptions::default(),
        )
        .unwrap()
        .network;
        let mut fresh = Network::init(&stack, &mut stream_rng(11, INIT_STREAM));
        assert_eq!(a.parameters(), fresh.parameters());
    }

    #[test]
    fn same_seed_is_bitwise_reproducible() {
        let data = sum_dataset(60, 6, 2);
        let stack = config(3).arch.build(6).unwrap();
        let run = || {
            train_model(&stack, &config(3), &data, &data, 5, TrainOptions::default())
                .unwrap()
                .network
                .parameters()
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn divergence_is_reported() {
        let data = sum_dataset(30, 6, 4);
        let mut cfg = config(50);
        cfg.optimizer = OptimizerConfig::new(OptimizerKind::Sgd).with_learning_rate(1e6);
        let stack = cfg.arch.build(6).unwrap();
        let err = train_model(&stack, &cfg, &data, &data, 0, TrainOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }
}
