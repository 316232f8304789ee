use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::CleanDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 16,
            min_leaf: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: f64,
        samples: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub n_features: usize,
    pub trees: Vec<RegressionTree>,
}

impl ForestModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: ForestParams,
    mtry: usize,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = rows.len();
        let sum: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let mean = sum / n as f64;
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            value: mean,
            samples: n,
        });
        if depth >= self.params.max_depth || n < 2 * self.params.min_leaf {
            return id;
        }
        let sse: f64 = rows.iter().map(|&r| (self.y[r] - mean).powi(2)).sum();
        if sse <= 0.0 {
            return id;
        }
        let Some(best) = self.best_split(rows, sum, rng) else {
            return id;
        };
        let mid = partition(rows, |r| self.x[r][best.feature] <= best.threshold);
        let (l, r) = rows.split_at_mut(mid);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Greedy variance-reduction split over `mtry` randomly chosen features.
    fn best_split(&self, rows: &[usize], sum: f64, rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let n = rows.len();
        let f = self.x[0].len();
        let min_leaf = self.params.min_leaf;
        let parent = sum * sum / n as f64;
        let mut best: Option<BestSplit> = None;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
        for feature in sample(rng, f, self.mtry).into_iter() {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.x[r][feature], self.y[r])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += pairs[i].1;
                let n_left = i + 1;
                if n_left < min_leaf || n - n_left < min_leaf || pairs[i].0 == pairs[i + 1].0 {
                    continue;
                }
                let right_sum = sum - left_sum;
                // SSE reduction = sum_l^2/n_l + sum_r^2/n_r - sum^2/n
                let gain = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / (n - n_left) as f64
                    - parent;
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        feature,
                        threshold: 0.5 * (pairs[i].0 + pairs[i + 1].0),
                        gain,
                    });
                }
            }
        }
        best
    }
}

fn partition(rows: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let mut mid = 0;
    for i in 0..rows.len() {
        if pred(rows[i]) {
            rows.swap(i, mid);
            mid += 1;
        }
    }
    mid
}

fn fit_tree(
    train: &CleanDataset,
    params: ForestParams,
    mtry: usize,
    tree_index: usize,
) -> RegressionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(tree_index as u64 + 1);
    let n = train.n_rows();
    let mut rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut builder = Builder {
        x: &train.features,
        y: &train.target,
        params,
        mtry,
        nodes: Vec::new(),
    };
    builder.grow(&mut rows, 0, &mut rng);
    RegressionTree {
        nodes: builder.nodes,
    }
}

/// Bagged CART regression trees with `ceil(F/3)` candidate features per split.
/// Trees are fitted in parallel; each tree has its own seeded stream.
pub fn fit_random_forest(train: &CleanDataset, params: ForestParams) -> Result<ForestModel> {
    if params.trees == 0 || params.min_leaf == 0 {
        return Err(Error::Config(
            "forest needs trees >= 1 and min_leaf >= 1".into(),
        ));
    }
    if train.n_rows() < 2 * params.min_leaf || train.n_features() == 0 {
        return Err(Error::Config(format!(
            "forest needs at least {} rows and one feature",
            2 * params.min_leaf
        )));
    }
    let f = train.n_features();
    let mtry = f.div_ceil(3).clamp(1, f);
    let trees = (0..params.trees)
        .into_par_iter()
        .map(|t| fit_tree(train, params, mtry, t))
        .collect();
    Ok(ForestModel {
        params,
        n_features: f,
        trees,
    })
}
