use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::experiment::{run_seed, seed_options, ResultRecord, SeedOutcome};
use crate::arch::LayerStack;
use crate::data::CleanDataset;
use crate::error::{Error, Result};

/// Emitted once per finished experiment, in completion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Progress {
    /// Position in enumeration order.
    pub index: usize,
    pub completed: usize,
    pub total: usize,
    pub label: String,
    pub failures: usize,
}

/// Runs every (experiment, seed) pair on a pool of `workers` threads and
/// returns the records in the order of `configs`.
pub fn run_grid(
    configs: &[ExperimentConfig],
    dataset: &CleanDataset,
    workers: usize,
    on_progress: &(dyn Fn(Progress) + Sync),
) -> Result<Vec<ResultRecord>> {
    let stacks: Vec<LayerStack> = configs
        .iter()
        .map(|c| c.arch.build(dataset.n_features()))
        .collect::<Result<_>>()?;
    if let Some(c) = configs.iter().find(|c| c.seeds.is_empty()) {
        return Err(Error::Config(format!(
            "{} has no seeds",
            c.identity().label()
        )));
    }
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(e, c)| (0..c.seeds.len()).map(move |s| (e, s)))
        .collect();
    let remaining: Vec<AtomicUsize> = configs
        .iter()
        .map(|c| AtomicUsize::new(c.seeds.len()))
        .collect();
    let failures: Vec<AtomicUsize> = configs.iter().map(|_| AtomicUsize::new(0)).collect();
    let finished = Mutex::new(0usize);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<Result<SeedOutcome>> = pool.install(|| {
        jobs.par_iter()
            .with_max_len(1)
            .map(|&(e, s)| {
                let out = run_seed(&configs[e], &stacks[e], dataset, s, seed_options(s));
                if out.is_err() {
                    failures[e].fetch_add(1, Ordering::SeqCst);
                }
                if remaining[e].fetch_sub(1, Ordering::SeqCst) == 1 {
                    let mut done = finished.lock().expect("progress lock");
                    *done += 1;
                    on_progress(Progress {
                        index: e,
                        completed: *done,
                        total: configs.len(),
                        label: configs[e].identity().label(),
                        failures: failures[e].load(Ordering::SeqCst),
                    });
                }
                out
            })
            .collect()
    });

    let mut outcomes = outcomes.into_iter();
    Ok(configs
        .iter()
        .map(|c| {
            let mine: Vec<_> = outcomes.by_ref().take(c.seeds.len()).collect();
            ResultRecord::from_outcomes(c.identity(), mine)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{ArchSpec, MlpFamily, MlpSpec};
    use crate::harness::run_experiment;
    use crate::nn::{ActivationKind, LossKind};
    use crate::optim::{OptimizerConfig, OptimizerKind};

    #[test]
    fn pool_matches_sequential_and_keeps_order() {
        let features: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![i as f64 / 60.0, (i % 7) as f64 / 7.0])
            .collect();
        let target = features.iter().map(|r| r[0] - r[1]).collect();
        let data = CleanDataset::from_numeric(features, target).unwrap();
        let configs: Vec<ExperimentConfig> = [(4, 2), (5, 2), (5, 3)]
            .iter()
            .map(|&(n, m)| {
                ExperimentConfig::new(
                    ArchSpec::Mlp(MlpSpec::new(
                        MlpFamily::Trapezium,
                        n,
                        m,
                        ActivationKind::Tanh,
                    )),
                    OptimizerConfig::new(OptimizerKind::Adam),
                    LossKind::Mae,
                    2,
                )
                .with_seeds(vec![1, 2])
            })
            .collect();
        let seen = Mutex::new(Vec::new());
        let recs = run_grid(&configs, &data, 3, &|p| seen.lock().unwrap().push(p.index)).unwrap();
        let mut seen = seen.into_inner().unwrap();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2]);
        for (cfg, rec) in configs.iter().zip(&recs) {
            let seq = run_experiment(cfg, &data).unwrap();
            assert_eq!(rec.identity, seq.identity);
            assert_eq!(rec.per_seed, seq.per_seed);
        }
    }
}
