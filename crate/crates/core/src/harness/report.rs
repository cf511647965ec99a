//! Side-by-side evaluation of a model suite on one shared split.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{fit_model, ModelKind, ModelParams, ModelSpec};
use crate::dataset::{split, Dataset, FeatureSpec};
use crate::metrics::{score, MetricsReport};
use crate::{Error, Result};

/// Published scores (MSE, RMSE, MAE, R²) for the eight reference
/// configurations on the original 55,057-record pyranometer dataset. That
/// dataset is not public, so these are documentation only and never asserted.
pub const REFERENCE_SCORES: [(&str, f64, f64, f64, f64); 8] = [
    ("Linear Regression", 21773.10, 147.56, 105.10, 0.60),
    ("Polynomial Regression", 16268.56, 127.55, 82.69, 0.70),
    ("K-Nearest Neighbors", 14625.13, 120.93, 59.33, 0.73),
    ("Decision Tree Regressor", 17540.69, 132.44, 78.75, 0.68),
    ("SVR Kernel Lineal", 23889.29, 154.56, 101.22, 0.56),
    ("SVR Kernel RBF", 29976.37, 173.14, 104.11, 0.44),
    ("Random Forest Regressor", 14106.10, 118.77, 58.56, 0.74),
    ("Gradient Boosting Regressor", 13112.21, 114.51, 56.87, 0.72),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub display_name: String,
    pub kind: ModelKind,
    /// `None` when fitting or prediction failed; see `error`.
    pub metrics: Option<MetricsReport>,
    pub training_rows: usize,
    pub error: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
    pub split: String,
    pub train_rows: usize,
    pub test_rows: usize,
    pub seed: u64,
    /// SHA-256 over feature names, feature values and targets.
    pub dataset_fingerprint: String,
    pub feature_names: Vec<String>,
    pub footnotes: Vec<String>,
}

/// Content hash of a dataset; equal datasets share a fingerprint.
pub fn fingerprint(ds: &Dataset) -> String {
    let mut h = Sha256::new();
    for name in ds.feature_names() {
        h.update(name.as_bytes());
        h.update([0u8]);
    }
    for (row, y) in ds.features().iter().zip(ds.target()) {
        for v in row {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(y.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Trains every spec on one seeded train split and scores it on the held-out
/// rows. Models train in parallel; rows keep suite order. A failing model
/// yields a row with `error` set instead of aborting the comparison.
pub fn run_comparison(
    ds: &Dataset,
    suite: &[ModelSpec],
    feature_spec: &FeatureSpec,
    split_fraction: f64,
    seed: u64,
) -> Result<ComparisonReport> {
    if suite.is_empty() {
        return Err(Error::Empty("model suite is empty"));
    }
    let (train, test) = split(ds, split_fraction, seed)?;

    let rows: Vec<ReportRow> = suite
        .par_iter()
        .map(|spec| {
            let outcome = fit_model(spec, &train, feature_spec).and_then(|model| {
                let predicted = model.predict_rows(test.features())?;
                let m = score(test.target(), &predicted)?;
                Ok((m, model.training_rows, model.notes))
            });
            match outcome {
                Ok((m, training_rows, notes)) => ReportRow {
                    display_name: spec.display_name.clone(),
                    kind: spec.kind(),
                    metrics: Some(m),
                    training_rows,
                    error: None,
                    notes,
                },
                Err(e) => ReportRow {
                    display_name: spec.display_name.clone(),
                    kind: spec.kind(),
                    metrics: None,
                    training_rows: 0,
                    error: Some(e.to_string()),
                    notes: vec![],
                },
            }
        })
        .collect();

    let mut footnotes = Vec::new();
    for row in &rows {
        for note in &row.notes {
            footnotes.push(format!("{}: {note}", row.display_name));
        }
        if let Some(e) = &row.error {
            footnotes.push(format!("{}: failed: {e}", row.display_name));
        }
    }
    if suite.iter().any(|s| {
        matches!(s.params, ModelParams::SvrPoly(_)) && s.display_name.contains("RBF")
    }) {
        footnotes.push(
            "SVR Kernel RBF: the reference configuration specifies kernel='poly' for this row, \
             so a cubic polynomial kernel is used; select kind svr_rbf for a true RBF kernel."
                .to_string(),
        );
    }
    if suite.iter().any(|s| s.kind() == ModelKind::Gbr) {
        footnotes.push(
            "Gradient Boosting Regressor: the published reference R² appears as both 0.72 \
             and 0.76; neither value is assumed."
                .to_string(),
        );
    }

    Ok(ComparisonReport {
        rows,
        split: format!(
            "random {:.0}/{:.0} train/test split",
            split_fraction * 100.0,
            (1.0 - split_fraction) * 100.0
        ),
        train_rows: train.n_samples(),
        test_rows: test.n_samples(),
        seed,
        dataset_fingerprint: fingerprint(ds),
        feature_names: ds.feature_names().to_vec(),
        footnotes,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ComparisonReport {
    pub fn row(&self, display_name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.display_name == display_name)
    }

    pub fn r2_of(&self, kind: ModelKind) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.kind == kind)
            .and_then(|r| r.metrics)
            .and_then(|m| m.r2)
    }

    /// `model,mse,rmse,mae,r2` at full precision; failed rows and undefined
    /// R² leave fields empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,mse,rmse,mae,r2\n");
        for row in &self.rows {
            let name = if row.display_name.contains([',', '"']) {
                format!("\"{}\"", row.display_name.replace('"', "\"\""))
            } else {
                row.display_name.clone()
            };
            let m = row.metrics;
            let _ = writeln!(
                out,
                "{name},{},{},{},{}",
                fmt_opt(m.map(|m| m.mse)),
                fmt_opt(m.map(|m| m.rmse)),
                fmt_opt(m.map(|m| m.mae)),
                fmt_opt(m.and_then(|m| m.r2)),
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for ComparisonReport {
    /// Fixed-width table with the columns Model, MSE, RMSE, MAE, R².
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} ({} train / {} test rows), seed {}",
            self.split, self.train_rows, self.test_rows, self.seed
        )?;
        writeln!(f, "features: {}", self.feature_names.join(", "))?;
        writeln!(f, "dataset sha256: {}", self.dataset_fingerprint)?;
        writeln!(f)?;
        writeln!(
            f,
            "{:<32}{:>14}{:>10}{:>10}{:>8}",
            "Model", "MSE", "RMSE", "MAE", "R2"
        )?;
        for row in &self.rows {
            match row.metrics {
                Some(m) => writeln!(
                    f,
                    "{:<32}{:>14.2}{:>10.2}{:>10.2}{:>8}",
                    row.display_name,
                    m.mse,
                    m.rmse,
                    m.mae,
                    m.r2.map_or("n/a".to_string(), |r| format!("{r:.2}"))
                )?,
                None => writeln!(f, "{:<32}{:>14}", row.display_name, "failed")?,
            }
        }
        if !self.footnotes.is_empty() {
            writeln!(f)?;
            for (i, note) in self.footnotes.iter().enumerate() {
                writeln!(f, "[{}] {note}", i + 1)?;
            }
        }
        Ok(())
    }
}
