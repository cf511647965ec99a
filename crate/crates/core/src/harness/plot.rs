//! Actual vs predicted series for a single day.

use std::fmt::Write as _;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::dataset::{FeatureSpec, Record, TIMESTAMP_FORMAT};
use crate::{Error, Result};

pub const PLOT_CSV_HEADER: &str = "timestamp,actual_wm2,predicted_wm2,temperature_k";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub timestamp: NaiveDateTime,
    pub actual_wm2: f64,
    pub predicted_wm2: f64,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub display_name: String,
    pub day: NaiveDate,
    /// Strictly increasing timestamps.
    pub points: Vec<PlotPoint>,
}

/// Predicts every record on `day` with `model`, featurized by `spec`.
///
/// Points are sorted by time; when several records share a timestamp only the
/// first in input order is kept.
pub fn export_plot_data(
    model: &TrainedModel,
    records: &[Record],
    day: NaiveDate,
    spec: &FeatureSpec,
) -> Result<PlotSeries> {
    spec.validate()?;
    let mut on_day: Vec<&Record> = records
        .iter()
        .filter(|r| r.timestamp.date() == day)
        .collect();
    if on_day.is_empty() {
        return Err(Error::NoRecordsOnDay(day));
    }
    on_day.sort_by_key(|r| r.timestamp);
    on_day.dedup_by_key(|r| r.timestamp);

    let points = on_day
        .into_iter()
        .map(|r| {
            let predicted = model.predict(&spec.row(r.timestamp, r.temperature))?;
            Ok(PlotPoint {
                timestamp: r.timestamp,
                actual_wm2: r.irradiance,
                predicted_wm2: predicted,
                temperature_k: r.temperature,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlotSeries {
        display_name: model.display_name.clone(),
        day,
        points,
    })
}

impl PlotSeries {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{PLOT_CSV_HEADER}\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                p.timestamp.format(TIMESTAMP_FORMAT),
                p.actual_wm2,
                p.predicted_wm2,
                p.temperature_k
            );
        }
        out
    }
}
