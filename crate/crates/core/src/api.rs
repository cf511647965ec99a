//! JSON types exchanged between the forecasting service and its clients.

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::harness::ModelKind;
use crate::metrics::MetricsReport;

/// Local forecast time (America/Guayaquil, no offset), serialized as
/// `YYYY-MM-DDTHH:MM:SS`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    pub timestamp: NaiveDateTime,
    pub temperature_k: f64,
    pub predicted_wm2: f64,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_id: String,
    pub kind: ModelKind,
    pub display_name: String,
    pub feature_names: Vec<String>,
    /// Modification time of the model file.
    pub trained_at: Option<DateTime<Utc>>,
    pub metrics: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
}

impl Health {
    pub fn ok() -> Self {
        Health {
            status: "ok".to_string(),
        }
    }
}

/// Error payload: `code` is a stable snake_case identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReloadSummary {
    pub models: usize,
    /// Files that failed to load, with the reason.
    pub skipped: Vec<String>,
}

pub const MAX_FORECAST_HOURS: u32 = 168;
pub const DEFAULT_FORECAST_HOURS: u32 = 24;
/// Name of the comparison report inside the service's model directory.
pub const EVALUATION_FILE: &str = "evaluation.json";
