//! Ordinary least squares with optional degree-2 polynomial expansion.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::linalg;
use crate::{Error, Result};

/// Basis expansion φ(x): degree 1 gives `[1, x₁ … x_d]`; degree 2 appends
/// every monomial `xᵢ·xⱼ` with `i ≤ j` in lexicographic order.
pub fn expand_polynomial(row: &[f64], degree: u32) -> Result<Vec<f64>> {
    check_degree(degree)?;
    let d = row.len();
    let mut out = Vec::with_capacity(expanded_len(d, degree));
    out.push(1.0);
    out.extend_from_slice(row);
    if degree == 2 {
        for i in 0..d {
            for j in i..d {
                out.push(row[i] * row[j]);
            }
        }
    }
    Ok(out)
}

fn check_degree(degree: u32) -> Result<()> {
    match degree {
        1 | 2 => Ok(()),
        other => Err(Error::invalid(format!(
            "polynomial degree {other} is not supported (use 1 or 2)"
        ))),
    }
}

fn expanded_len(d: usize, degree: u32) -> usize {
    match degree {
        1 => 1 + d,
        _ => 1 + d + d * (d + 1) / 2,
    }
}

fn expanded_names(names: &[String], degree: u32) -> Vec<String> {
    let mut out = vec!["intercept".to_string()];
    out.extend(names.iter().cloned());
    if degree == 2 {
        for i in 0..names.len() {
            for j in i..names.len() {
                if i == j {
                    out.push(format!("{}^2", names[i]));
                } else {
                    out.push(format!("{}*{}", names[i], names[j]));
                }
            }
        }
    }
    out
}

/// Fitted OLS model. Coefficients are in the units of the raw features,
/// first one being the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub feature_names: Vec<String>,
    pub degree: u32,
    /// Width of the raw (unexpanded) feature row.
    pub input_dim: usize,
}

pub fn fit_ols(ds: &Dataset, degree: u32) -> Result<LinearModel> {
    check_degree(degree)?;
    let d = ds.n_features();
    let width = expanded_len(d, degree);
    if ds.n_samples() < width {
        return Err(Error::NotEnoughSamples {
            needed: width,
            got: ds.n_samples(),
        });
    }
    let design: Vec<Vec<f64>> = ds
        .features()
        .iter()
        .map(|row| expand_polynomial(row, degree))
        .collect::<Result<_>>()?;
    let names = expanded_names(ds.feature_names(), degree);
    let coefficients = linalg::least_squares(&design, ds.target()).map_err(|rank| {
        Error::RankDeficient {
            columns: rank
                .dependent_columns
                .iter()
                .map(|&j| names[j].clone())
                .collect(),
        }
    })?;
    Ok(LinearModel {
        coefficients,
        feature_names: names,
        degree,
        input_dim: d,
    })
}

impl LinearModel {
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: row.len(),
            });
        }
        let phi = expand_polynomial(row, self.degree)?;
        Ok(phi.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum())
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}
