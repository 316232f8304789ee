use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::CleanDataset;
use crate::error::{Error, Result};

/// Seeded regression benchmark: features uniform on `[-1, 1]`, target a
/// linear part plus pairwise products plus Gaussian noise. Only the first
/// `informative` features enter the target; the rest are nuisance columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub features: usize,
    pub informative: usize,
    /// Number of pairwise product terms.
    pub interactions: usize,
    /// Share of the noiseless target variance carried by the products.
    pub interaction_share: f64,
    /// Noise standard deviation relative to the noiseless target's.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            rows: 5000,
            features: 24,
            informative: 8,
            interactions: 4,
            interaction_share: 0.4,
            noise: 0.01,
            seed: 0,
        }
    }
}

/// Generates the dataset described by `spec`; the signal has unit variance.
pub fn synthetic_dataset(spec: &SyntheticSpec) -> Result<CleanDataset> {
    let f = spec.features;
    let k = spec.informative;
    if k < 2
        || k > f
        || spec.rows == 0
        || !(0.0..=1.0).contains(&spec.interaction_share)
        || spec.noise < 0.0
    {
        return Err(Error::Config(format!("invalid synthetic spec {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let signs = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { 1.0 } else { -1.0 };

    // Var(a x) = a^2 / 3 and Var(b x y) = b^2 / 9 for independent U[-1, 1].
    let mut linear: Vec<f64> = (0..k)
        .map(|_| signs(&mut rng) * rng.gen_range(0.5..1.5))
        .collect();
    let lin_var: f64 = linear.iter().map(|a| a * a / 3.0).sum();
    let lin_scale = ((1.0 - spec.interaction_share) / lin_var).sqrt();
    linear.iter_mut().for_each(|a| *a *= lin_scale);

    // distinct unordered pairs, so the product terms are uncorrelated
    let all_pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    if spec.interactions > all_pairs.len() {
        return Err(Error::Config(format!(
            "{} interactions requested but only {} feature pairs exist",
            spec.interactions,
            all_pairs.len()
        )));
    }
    let mut pairs: Vec<(usize, usize, f64)> = sample(&mut rng, all_pairs.len(), spec.interactions)
        .into_iter()
        .map(|p| (all_pairs[p].0, all_pairs[p].1, 0.0))
        .collect();
    for p in &mut pairs {
        p.2 = signs(&mut rng) * rng.gen_range(0.5..1.5);
    }
    let int_var: f64 = pairs.iter().map(|p| p.2 * p.2 / 9.0).sum();
    if int_var > 0.0 {
        let s = (spec.interaction_share / int_var).sqrt();
        pairs.iter_mut().for_each(|p| p.2 *= s);
    }

    let noise = Normal::new(0.0, spec.noise).expect("finite noise scale");
    let mut features = Vec::with_capacity(spec.rows);
    let mut target = Vec::with_capacity(spec.rows);
    for _ in 0..spec.rows {
        let x: Vec<f64> = (0..f).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let lin: f64 = linear.iter().zip(&x).map(|(a, v)| a * v).sum();
        let int: f64 = pairs.iter().map(|&(i, j, b)| b * x[i] * x[j]).sum();
        target.push(lin + int + noise.sample(&mut rng));
        features.push(x);
    }
    CleanDataset::from_numeric(features, target)
}
