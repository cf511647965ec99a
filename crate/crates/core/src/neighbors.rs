//! Inverse-distance weighted k-nearest-neighbors regression.
//!
//! The model is a lazy learner: it keeps the full training set and scans it
//! linearly for every query. Serialized models therefore grow with the
//! training set (n × (d + 1) floats).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::{Error, Result};

/// Default neighbor count.
pub const DEFAULT_K: usize = 10;

/// Per-feature standardization learned from the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for r in rows {
            for j in 0..d {
                scale[j] += (r[j] - mean[j]).powi(2) / n;
            }
        }
        // constant columns keep unit scale
        let scale = scale
            .into_iter()
            .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        Standardizer { mean, scale }
    }

    fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub train_features: Vec<Vec<f64>>,
    pub train_targets: Vec<f64>,
    /// Effective neighbor count, already capped at the training size.
    pub k: usize,
    /// When present, features are standardized before distances are taken.
    pub standardizer: Option<Standardizer>,
}

/// Stores the training set; the effective k is `min(k, n)`.
pub fn fit_knn(ds: &Dataset, k: usize, standardize: bool) -> Result<KnnModel> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot fit k-NN on an empty dataset"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let standardizer = standardize.then(|| Standardizer::fit(ds.features()));
    let train_features = match &standardizer {
        Some(s) => ds.features().iter().map(|r| s.apply(r)).collect(),
        None => ds.features().to_vec(),
    };
    Ok(KnnModel {
        train_features,
        train_targets: ds.target().to_vec(),
        k: k.min(ds.n_samples()),
        standardizer,
    })
}

impl KnnModel {
    pub fn n_features(&self) -> usize {
        self.train_features[0].len()
    }

    pub fn predict(&self, query: &[f64]) -> Result<f64> {
        let d = self.n_features();
        if query.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: query.len(),
            });
        }
        let scaled;
        let query = match &self.standardizer {
            Some(s) => {
                scaled = s.apply(query);
                &scaled[..]
            }
            None => query,
        };

        let mut dist: Vec<(f64, usize)> = self
            .train_features
            .iter()
            .enumerate()
            .map(|(i, row)| (squared_distance(row, query), i))
            .collect();
        let k = self.k;
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp_neighbors);
            dist.truncate(k);
        }

        let zero: Vec<f64> = dist
            .iter()
            .filter(|(d2, _)| *d2 == 0.0)
            .map(|&(_, i)| self.train_targets[i])
            .collect();
        if !zero.is_empty() {
            return Ok(zero.iter().sum::<f64>() / zero.len() as f64);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for &(d2, i) in &dist {
            let w = 1.0 / d2.sqrt();
            num += w * self.train_targets[i];
            den += w;
        }
        Ok(num / den)
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Distance, then training index; never equal for distinct rows.
fn cmp_neighbors(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}
