//! Regression error metrics: MSE, RMSE, MAE and the coefficient of
//! determination.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Scores of one model on one evaluation split.
///
/// `r2` is `None` when the actual values have zero variance, where the
/// coefficient of determination is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r2: Option<f64>,
    pub n: usize,
}

pub fn score(actual: &[f64], predicted: &[f64]) -> Result<MetricsReport> {
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::Empty("no samples to score"));
    }
    let n = actual.len() as f64;
    let mut sse = 0.0;
    let mut sae = 0.0;
    for (y, p) in actual.iter().zip(predicted) {
        let e = y - p;
        sse += e * e;
        sae += e.abs();
    }
    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|y| (y - mean) * (y - mean)).sum();
    let mse = sse / n;
    Ok(MetricsReport {
        mse,
        rmse: mse.sqrt(),
        mae: sae / n,
        r2: (sst > 0.0).then(|| 1.0 - sse / sst),
        n: actual.len(),
    })
}
