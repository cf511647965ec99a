//! Pearson correlation and threshold-based variable selection.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::{Error, Result};

/// Label given to the target column in a [`CorrelationMatrix`].
pub const TARGET_LABEL: &str = "irradiance";

/// Default |r| threshold for [`select_variables`]; admits hour at r = 0.13.
pub const DEFAULT_SELECTION_THRESHOLD: f64 = 0.1;

fn centered_moments(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy, sxx, syy)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::NotEnoughSamples {
            needed: 2,
            got: x.len(),
        });
    }
    let (sxy, sxx, syy) = centered_moments(x, y);
    if sxx == 0.0 {
        return Err(Error::ConstantColumn("x".into()));
    }
    if syy == 0.0 {
        return Err(Error::ConstantColumn("y".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Symmetric matrix of pairwise correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Result<f64> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        Ok(self.values[i][j])
    }

    fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// CSV with labels as the first row and first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variable");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Correlations over every feature column plus the target, labelled
/// [`TARGET_LABEL`].
pub fn correlation_matrix(ds: &Dataset) -> Result<CorrelationMatrix> {
    let mut labels: Vec<String> = ds.feature_names().to_vec();
    labels.push(TARGET_LABEL.to_string());
    let mut columns: Vec<Vec<f64>> = (0..ds.n_features()).map(|j| ds.column(j)).collect();
    columns.push(ds.target().to_vec());

    if ds.n_samples() < 2 {
        return Err(Error::NotEnoughSamples {
            needed: 2,
            got: ds.n_samples(),
        });
    }
    for (label, col) in labels.iter().zip(&columns) {
        if col.iter().all(|&v| v == col[0]) {
            return Err(Error::ConstantColumn(label.clone()));
        }
    }

    let d = labels.len();
    let mut values = vec![vec![0.0; d]; d];
    for i in 0..d {
        values[i][i] = 1.0;
        for j in (i + 1)..d {
            let r = pearson(&columns[i], &columns[j]).map_err(|e| match e {
                Error::ConstantColumn(_) => Error::ConstantColumn(labels[i].clone()),
                other => other,
            })?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { labels, values })
}

/// Features whose |r| with `target_label` is at least `threshold`, strongest
/// first. Ties keep matrix label order.
pub fn select_variables(
    cm: &CorrelationMatrix,
    target_label: &str,
    threshold: f64,
) -> Result<Vec<String>> {
    let t = cm.index_of(target_label)?;
    let mut chosen: Vec<(usize, f64)> = cm
        .labels
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != t)
        .map(|(i, _)| (i, cm.values[i][t].abs()))
        .filter(|&(_, r)| r >= threshold)
        .collect();
    chosen.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(chosen.into_iter().map(|(i, _)| cm.labels[i].clone()).collect())
}
