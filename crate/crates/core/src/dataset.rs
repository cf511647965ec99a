//! Pyranometer records: parsing, cleaning, feature extraction, splitting and
//! descriptive statistics.

use std::fmt;
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDateTime, Timelike};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// CSV header of the record format.
pub const CSV_HEADER: &str = "timestamp,irradiance_wm2,temperature_k";

/// Timestamp layout used on disk: ISO 8601 local time without offset.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// Default train fraction for [`split`].
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;
/// Default split seed.
pub const DEFAULT_SEED: u64 = 42;

/// One pyranometer observation.
///
/// Timestamps are local time (America/Guayaquil, UTC-5, no DST) and carry no
/// offset. Irradiance may be slightly negative: night-time sensor offsets are
/// kept as recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub timestamp: NaiveDateTime,
    /// W/m².
    pub irradiance: f64,
    /// Kelvin.
    pub temperature: f64,
}

impl Record {
    pub fn new(timestamp: NaiveDateTime, irradiance: f64, temperature: f64) -> Self {
        Record {
            timestamp,
            irradiance,
            temperature,
        }
    }

    fn is_valid(&self) -> bool {
        self.irradiance.is_finite() && self.temperature.is_finite() && self.temperature > 0.0
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M"))
        .ok()
}

fn parse_finite(field: &str, name: &str, line: u64) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("{name}: cannot parse {field:?} as a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{name}: non-finite value {field:?}"),
        });
    }
    Ok(value)
}

/// Parses records from CSV text with header [`CSV_HEADER`].
///
/// Errors carry the 1-based line number of the offending row.
pub fn parse_records<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let header = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let found = header.iter().collect::<Vec<_>>().join(",");
    if found != CSV_HEADER {
        return Err(Error::Header { found });
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let timestamp = parse_timestamp(&row[0]).ok_or_else(|| Error::Parse {
            line,
            message: format!("unparseable timestamp {:?}", &row[0]),
        })?;
        let irradiance = parse_finite(&row[1], "irradiance_wm2", line)?;
        let temperature = parse_finite(&row[2], "temperature_k", line)?;
        if temperature <= 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("temperature_k must be positive, got {temperature}"),
            });
        }
        records.push(Record::new(timestamp, irradiance, temperature));
    }
    Ok(records)
}

/// Writes records in the CSV format read by [`parse_records`]. Floats are
/// printed in shortest round-trip form, so reparsing is lossless.
pub fn write_records<W: Write>(mut out: W, records: &[Record]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{}",
            r.timestamp.format(TIMESTAMP_FORMAT),
            r.irradiance,
            r.temperature
        )?;
    }
    Ok(())
}

/// Drops records with non-finite fields or non-positive temperature. With
/// `clamp_negative`, irradiance is floored at zero.
pub fn clean(records: &[Record], clamp_negative: bool) -> Vec<Record> {
    records
        .iter()
        .filter(|r| r.is_valid())
        .map(|r| {
            let mut r = *r;
            if clamp_negative && r.irradiance < 0.0 {
                r.irradiance = 0.0;
            }
            r
        })
        .collect()
}

/// Which calendar and sensor variables become model features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub use_temperature: bool,
    pub use_hour: bool,
    pub use_month: bool,
    /// Polynomial degree applied by the OLS estimator; 1 means no expansion.
    pub polynomial_degree: u32,
}

impl Default for FeatureSpec {
    /// Temperature and hour of day, no expansion.
    fn default() -> Self {
        FeatureSpec {
            use_temperature: true,
            use_hour: true,
            use_month: false,
            polynomial_degree: 1,
        }
    }
}

impl FeatureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.use_temperature || self.use_hour || self.use_month) {
            return Err(Error::invalid("feature spec selects no features"));
        }
        if self.polynomial_degree < 1 {
            return Err(Error::invalid("polynomial degree must be at least 1"));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.use_temperature {
            names.push("temperature_k".to_string());
        }
        if self.use_hour {
            names.push("hour".to_string());
        }
        if self.use_month {
            names.push("month".to_string());
        }
        names
    }

    pub fn n_features(&self) -> usize {
        self.use_temperature as usize + self.use_hour as usize + self.use_month as usize
    }

    /// Feature row in the fixed order temperature, hour, month.
    pub fn row(&self, timestamp: NaiveDateTime, temperature: f64) -> Vec<f64> {
        let mut row = Vec::with_capacity(3);
        if self.use_temperature {
            row.push(temperature);
        }
        if self.use_hour {
            row.push(f64::from(timestamp.hour()));
        }
        if self.use_month {
            row.push(f64::from(timestamp.month()));
        }
        row
    }
}

/// Feature matrix (row-major) plus irradiance target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    target: Vec<f64>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        target: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        if features.len() != target.len() {
            return Err(Error::DimensionMismatch {
                expected: target.len(),
                got: features.len(),
            });
        }
        for row in &features {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("non-finite feature value"));
            }
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite target value"));
        }
        Ok(Dataset {
            features,
            target,
            feature_names,
        })
    }

    /// Single-feature dataset, convenient in tests and examples.
    pub fn from_columns(x: &[f64], y: &[f64]) -> Result<Self> {
        Dataset::new(
            x.iter().map(|&v| vec![v]).collect(),
            y.to_vec(),
            vec!["x".to_string()],
        )
    }

    pub fn n_samples(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.features.iter().map(|row| row[j]).collect()
    }

    /// Rows at `indices`, in that order; duplicates allowed.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            target: indices.iter().map(|&i| self.target[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Builds the feature matrix for `records` under `spec`; the target is
/// irradiance.
pub fn extract_features(records: &[Record], spec: &FeatureSpec) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::Empty("no records to featurize"));
    }
    spec.validate()?;
    let features = records
        .iter()
        .map(|r| spec.row(r.timestamp, r.temperature))
        .collect();
    let target = records.iter().map(|r| r.irradiance).collect();
    Dataset::new(features, target, spec.feature_names())
}

/// Seeded random train/test partition of `0..n`.
///
/// The permutation is a Fisher-Yates shuffle driven by [`rng::seeded`]. The
/// first `ceil(train_fraction * n)` indices, kept within `1..n`, go to train.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::NotEnoughSamples { needed: 2, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let n_train = ((train_fraction * n as f64).ceil() as usize).clamp(1, n - 1);
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds.n_samples(), train_fraction, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Coastal Ecuador season of a calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    /// December through May.
    Wet,
    /// June through November.
    Dry,
}

impl Season {
    pub fn of_month(month: u32) -> Season {
        match month {
            12 | 1..=5 => Season::Wet,
            _ => Season::Dry,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Descriptive statistics laid out like the classic "describe" table:
/// columns Month, Hour, Irradiance, Temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub columns: Vec<ColumnSummary>,
    pub wet_season_count: usize,
    pub dry_season_count: usize,
}

/// Quantile by linear interpolation between order statistics of `sorted`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn describe(name: &str, values: &[f64]) -> ColumnSummary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    ColumnSummary {
        name: name.to_string(),
        count: n,
        mean,
        std,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
    }
}

pub fn summarize(records: &[Record]) -> Result<SummaryTable> {
    if records.is_empty() {
        return Err(Error::Empty("no records to summarize"));
    }
    let month: Vec<f64> = records.iter().map(|r| f64::from(r.timestamp.month())).collect();
    let hour: Vec<f64> = records.iter().map(|r| f64::from(r.timestamp.hour())).collect();
    let irradiance: Vec<f64> = records.iter().map(|r| r.irradiance).collect();
    let temperature: Vec<f64> = records.iter().map(|r| r.temperature).collect();
    let wet = records
        .iter()
        .filter(|r| Season::of_month(r.timestamp.month()) == Season::Wet)
        .count();
    Ok(SummaryTable {
        columns: vec![
            describe("Month", &month),
            describe("Hour", &hour),
            describe("Irradiance (W/m²)", &irradiance),
            describe("Temperature K", &temperature),
        ],
        wet_season_count: wet,
        dry_season_count: records.len() - wet,
    })
}

impl fmt::Display for SummaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<6}", "")?;
        for c in &self.columns {
            write!(f, "{:>20}", c.name)?;
        }
        writeln!(f)?;
        let rows: [(&str, fn(&ColumnSummary) -> f64); 8] = [
            ("count", |c| c.count as f64),
            ("mean", |c| c.mean),
            ("std", |c| c.std),
            ("min", |c| c.min),
            ("25%", |c| c.q25),
            ("50%", |c| c.median),
            ("75%", |c| c.q75),
            ("max", |c| c.max),
        ];
        for (label, get) in rows {
            write!(f, "{label:<6}")?;
            for c in &self.columns {
                if label == "count" {
                    write!(f, "{:>20}", c.count)?;
                } else {
                    write!(f, "{:>20.2}", get(c))?;
                }
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "season: wet (Dec-May) {}, dry (Jun-Nov) {}",
            self.wet_season_count, self.dry_season_count
        )
    }
}
