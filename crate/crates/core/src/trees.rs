//! CART regression trees and the two tree ensembles built on them: a
//! bootstrap-aggregated random forest and least-squares gradient boosting.
//!
//! Splits minimize the within-node sum of squared errors. Candidate
//! thresholds sit at midpoints between consecutive distinct feature values and
//! rows with `value <= threshold` go left. When several splits reduce the SSE
//! equally the lower feature index wins, then the smaller threshold.
//!
//! Each node scans presorted index lists, so fitting costs O(n·d) per tree
//! level after one initial sort per feature.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::{rng, Error, Result};

/// Splits whose SSE reduction is below this fraction of the parent SSE are
/// treated as rounding noise.
const MIN_RELATIVE_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return Ok(*value),
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let v = *row.get(*feature).ok_or(Error::DimensionMismatch {
                        expected: feature + 1,
                        got: row.len(),
                    })?;
                    node = if v <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Largest feature index referenced by any split.
    pub fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Internal {
                feature,
                left,
                right,
                ..
            } => [Some(*feature), left.max_feature(), right.max_feature()]
                .into_iter()
                .flatten()
                .max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_split: 2,
            seed: 42,
        }
    }
}

impl TreeConfig {
    pub fn with_depth(max_depth: usize) -> Self {
        TreeConfig {
            max_depth: Some(max_depth),
            ..TreeConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub threshold: f64,
    pub sse_reduction: f64,
}

/// Best single split of one feature column, or `None` when no threshold
/// reduces the SSE.
pub fn best_split(feature_column: &[f64], targets: &[f64]) -> Option<Split> {
    assert_eq!(feature_column.len(), targets.len());
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| feature_column[a].total_cmp(&feature_column[b]).then(a.cmp(&b)));
    let stats = NodeStats::new(&order, targets);
    scan(&order, |i| feature_column[i], targets, &stats)
}

struct NodeStats {
    mean: f64,
    sse: f64,
    centered_sum: f64,
    constant: bool,
}

impl NodeStats {
    fn new(samples: &[usize], y: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|&i| y[i]).sum::<f64>() / n;
        let first = y[samples[0]];
        let mut sse = 0.0;
        let mut centered_sum = 0.0;
        let mut constant = true;
        for &i in samples {
            let c = y[i] - mean;
            sse += c * c;
            centered_sum += c;
            constant &= y[i] == first;
        }
        NodeStats {
            mean,
            sse,
            centered_sum,
            constant,
        }
    }
}

/// Sweeps thresholds over `order` (sorted by `value`) using centered prefix
/// sums. Ties keep the first (smallest) threshold.
fn scan(
    order: &[usize],
    value: impl Fn(usize) -> f64,
    y: &[f64],
    stats: &NodeStats,
) -> Option<Split> {
    if stats.constant || order.len() < 2 {
        return None;
    }
    let n = order.len() as f64;
    let total = stats.centered_sum;
    let baseline = total * total / n;
    let min_gain = MIN_RELATIVE_GAIN * stats.sse;
    let mut best: Option<Split> = None;
    let mut left_sum = 0.0;
    for k in 0..order.len() - 1 {
        let i = order[k];
        left_sum += y[i] - stats.mean;
        let lo = value(i);
        let hi = value(order[k + 1]);
        if lo == hi {
            continue;
        }
        let n_left = (k + 1) as f64;
        let right_sum = total - left_sum;
        let reduction =
            left_sum * left_sum / n_left + right_sum * right_sum / (n - n_left) - baseline;
        if reduction > min_gain && best.is_none_or(|b| reduction > b.sse_reduction) {
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            best = Some(Split {
                threshold,
                sse_reduction: reduction,
            });
        }
    }
    best
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: &'a TreeConfig,
}

impl Builder<'_> {
    /// `sorted[f]` holds the node's samples ordered by feature `f`.
    fn build(&self, sorted: Vec<Vec<usize>>, depth: usize) -> TreeNode {
        let samples = &sorted[0];
        let stats = NodeStats::new(samples, self.y);
        let leaf = TreeNode::Leaf { value: stats.mean };
        if samples.len() < self.cfg.min_samples_split
            || self.cfg.max_depth.is_some_and(|m| depth >= m)
        {
            return leaf;
        }

        let mut best: Option<(usize, Split)> = None;
        for (f, order) in sorted.iter().enumerate() {
            if let Some(s) = scan(order, |i| self.x[i][f], self.y, &stats) {
                if best.is_none_or(|(_, b)| s.sse_reduction > b.sse_reduction) {
                    best = Some((f, s));
                }
            }
        }
        let Some((feature, split)) = best else {
            return leaf;
        };

        let (left, right): (Vec<Vec<usize>>, Vec<Vec<usize>>) = sorted
            .into_iter()
            .map(|order| {
                order
                    .into_iter()
                    .partition(|&i| self.x[i][feature] <= split.threshold)
            })
            .unzip();
        TreeNode::Internal {
            feature,
            threshold: split.threshold,
            left: Box::new(self.build(left, depth + 1)),
            right: Box::new(self.build(right, depth + 1)),
        }
    }
}

fn presort(x: &[Vec<f64>], samples: &[usize], d: usize) -> Vec<Vec<usize>> {
    (0..d)
        .map(|f| {
            let mut order = samples.to_vec();
            order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
            order
        })
        .collect()
}

fn fit_on(x: &[Vec<f64>], y: &[f64], samples: &[usize], cfg: &TreeConfig) -> TreeNode {
    let d = x[0].len();
    Builder { x, y, cfg }.build(presort(x, samples, d), 0)
}

/// Greedy CART regression tree.
pub fn fit_tree(ds: &Dataset, cfg: &TreeConfig) -> Result<TreeNode> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot fit a tree on an empty dataset"));
    }
    cfg.validate()?;
    let samples: Vec<usize> = (0..ds.n_samples()).collect();
    Ok(fit_on(ds.features(), ds.target(), &samples, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub tree_count: usize,
    pub bootstrap: bool,
    pub tree_config: TreeConfig,
    pub seed: u64,
}

impl Default for ForestConfig {
    /// 100 fully grown trees on bootstrap resamples, seed 42.
    fn default() -> Self {
        ForestConfig {
            tree_count: 100,
            bootstrap: true,
            tree_config: TreeConfig::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub bootstrap: bool,
    pub seed: u64,
}

/// Random forest: every tree sees a bootstrap resample (n draws with
/// replacement) from its own generator seeded with `seed + tree_index`, so
/// members train independently and in parallel. All features are candidates
/// at every split.
pub fn fit_forest(ds: &Dataset, cfg: &ForestConfig) -> Result<ForestModel> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot fit a forest on an empty dataset"));
    }
    if cfg.tree_count == 0 {
        return Err(Error::invalid("tree_count must be at least 1"));
    }
    cfg.tree_config.validate()?;
    let n = ds.n_samples();
    let trees = (0..cfg.tree_count)
        .into_par_iter()
        .map(|t| {
            let samples: Vec<usize> = if cfg.bootstrap {
                let mut rng = rng::derived(cfg.seed, t as u64);
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_on(ds.features(), ds.target(), &samples, &cfg.tree_config)
        })
        .collect();
    Ok(ForestModel {
        trees,
        bootstrap: cfg.bootstrap,
        seed: cfg.seed,
    })
}

impl ForestModel {
    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    /// Mean of the member predictions, clamped to their range so rounding
    /// never leaves it.
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if self.trees.is_empty() {
            return Err(Error::Empty("forest has no trees"));
        }
        let mut sum = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for t in &self.trees {
            let p = t.predict(row)?;
            sum += p;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        Ok((sum / self.trees.len() as f64).clamp(lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbrConfig {
    pub stage_count: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// Recorded for reproducibility; squared-error boosting without row
    /// subsampling draws no random numbers.
    pub seed: u64,
}

impl Default for GbrConfig {
    /// 100 stages, learning rate 0.2, depth 5, seed 42.
    fn default() -> Self {
        GbrConfig {
            stage_count: 100,
            learning_rate: 0.2,
            max_depth: 5,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbrModel {
    pub initial_value: f64,
    pub stages: Vec<TreeNode>,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub seed: u64,
    /// Training MSE after each stage; index 0 is the constant initial model.
    pub train_mse: Vec<f64>,
}

/// Least-squares gradient boosting: start from the target mean and fit each
/// stage's tree to the current residuals.
pub fn fit_gbr(ds: &Dataset, cfg: &GbrConfig) -> Result<GbrModel> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot fit boosting on an empty dataset"));
    }
    if !(cfg.learning_rate >= 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::invalid("learning_rate must be finite and non-negative"));
    }
    let tree_cfg = TreeConfig {
        max_depth: Some(cfg.max_depth),
        min_samples_split: 2,
        seed: cfg.seed,
    };
    tree_cfg.validate()?;

    let x = ds.features();
    let y = ds.target();
    let n = y.len();
    let initial_value = y.iter().sum::<f64>() / n as f64;
    let mut fitted = vec![initial_value; n];
    let mse = |f: &[f64]| y.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n as f64;

    let samples: Vec<usize> = (0..n).collect();
    let sorted = presort(x, &samples, ds.n_features());
    let mut stages = Vec::with_capacity(cfg.stage_count);
    let mut train_mse = vec![mse(&fitted)];
    for _ in 0..cfg.stage_count {
        let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let tree = Builder {
            x,
            y: &residuals,
            cfg: &tree_cfg,
        }
        .build(sorted.clone(), 0);
        for (f, row) in fitted.iter_mut().zip(x) {
            *f += cfg.learning_rate * tree.predict(row)?;
        }
        train_mse.push(mse(&fitted));
        stages.push(tree);
    }
    Ok(GbrModel {
        initial_value,
        stages,
        learning_rate: cfg.learning_rate,
        max_depth: cfg.max_depth,
        seed: cfg.seed,
        train_mse,
    })
}

impl GbrModel {
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        let mut acc = self.initial_value;
        for t in &self.stages {
            acc += self.learning_rate * t.predict(row)?;
        }
        Ok(acc)
    }
}
