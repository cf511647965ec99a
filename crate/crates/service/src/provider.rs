//! Hourly temperature forecasts.

use std::f64::consts::PI;
use std::time::Duration as StdDuration;

use chrono::{Duration, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

pub const KELVIN_OFFSET: f64 = 273.15;

/// One hourly temperature forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempPoint {
    pub hour_offset: u32,
    /// Local time.
    pub timestamp: NaiveDateTime,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub lat: f64,
    pub lon: f64,
}

impl Default for Location {
    /// Quevedo, Ecuador.
    fn default() -> Self {
        Location {
            lat: -1.0286,
            lon: -79.4635,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("weather provider is misconfigured: {0}")]
    Config(String),
    /// Transport failure or non-success status; worth retrying.
    #[error("weather provider request failed{}: {message}", .status.map(|s| format!(" with status {s}")).unwrap_or_default())]
    Http { status: Option<u16>, message: String },
    #[error("weather provider returned an unexpected payload: {0}")]
    Malformed(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::Http { .. })
    }
}

/// Converts a Celsius reading to Kelvin.
pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + KELVIN_OFFSET
}

/// Deterministic diurnal profile `296 + 6·max(0, sin(π(h−6)/12))` K at
/// local hour `h`.
pub fn mock_temperature(local_hour: u32) -> f64 {
    let h = f64::from(local_hour);
    296.0 + 6.0 * (PI * (h - 6.0) / 12.0).sin().max(0.0)
}

pub enum Provider {
    Mock,
    Real(MeteosourceClient),
}

impl Provider {
    pub fn name(&self) -> &'static str {
        match self {
            Provider::Mock => "mock",
            Provider::Real(_) => "real",
        }
    }

    /// `hours` contiguous points starting at local time `start`, which must
    /// be on a whole hour.
    pub async fn fetch_hourly_temperature(
        &self,
        location: Location,
        start: NaiveDateTime,
        hours: u32,
    ) -> Result<Vec<TempPoint>, ProviderError> {
        match self {
            Provider::Mock => Ok((0..hours)
                .map(|i| {
                    let timestamp = start + Duration::hours(i64::from(i));
                    TempPoint {
                        hour_offset: i,
                        timestamp,
                        temperature_k: mock_temperature(timestamp.hour()),
                    }
                })
                .collect()),
            Provider::Real(client) => client.hourly(location, start, hours).await,
        }
    }
}

/// Minimal client for a Meteosource-style point forecast endpoint:
/// `GET {base}/point?lat&lon&sections=hourly&units=metric&timezone&key`
/// answering `{"units": "metric", "hourly": {"data": [{"date", "temperature"}]}}`
/// with local naive dates and Celsius temperatures.
pub struct MeteosourceClient {
    http: reqwest::Client,
    base_url: String,
    api_key: String,
}

pub const DEFAULT_BASE_URL: &str = "https://www.meteosource.com/api/v1/free";
const TIMEZONE: &str = "America/Guayaquil";

#[derive(Deserialize)]
struct Payload {
    #[serde(default)]
    units: Option<String>,
    hourly: Hourly,
}

#[derive(Deserialize)]
struct Hourly {
    data: Vec<HourlyEntry>,
}

#[derive(Deserialize)]
struct HourlyEntry {
    date: String,
    temperature: f64,
}

impl MeteosourceClient {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Result<Self, ProviderError> {
        let api_key = api_key
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| ProviderError::Config("WEATHER_API_KEY is not set".into()))?;
        let http = reqwest::Client::builder()
            .timeout(StdDuration::from_secs(15))
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(MeteosourceClient {
            http,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
        })
    }

    async fn hourly(
        &self,
        location: Location,
        start: NaiveDateTime,
        hours: u32,
    ) -> Result<Vec<TempPoint>, ProviderError> {
        let response = self
            .http
            .get(format!("{}/point", self.base_url))
            .query(&[
                ("lat", location.lat.to_string()),
                ("lon", location.lon.to_string()),
                ("sections", "hourly".to_string()),
                ("units", "metric".to_string()),
                ("timezone", TIMEZONE.to_string()),
                ("language", "en".to_string()),
                ("key", self.api_key.clone()),
            ])
            .send()
            .await
            .map_err(|e| ProviderError::Http {
                status: e.status().map(|s| s.as_u16()),
                message: e.without_url().to_string(),
            })?;
        let status = response.status();
        if !status.is_success() {
            return Err(ProviderError::Http {
                status: Some(status.as_u16()),
                message: status.canonical_reason().unwrap_or("error").to_string(),
            });
        }
        let body = response.text().await.map_err(|e| ProviderError::Http {
            status: Some(status.as_u16()),
            message: e.without_url().to_string(),
        })?;
        parse_hourly(&body, start, hours)
    }
}

/// Extracts `hours` contiguous hourly points starting at `start` from a
/// provider payload.
pub fn parse_hourly(body: &str, start: NaiveDateTime, hours: u32) -> Result<Vec<TempPoint>, ProviderError> {
    let payload: Payload =
        serde_json::from_str(body).map_err(|e| ProviderError::Malformed(e.to_string()))?;
    if let Some(units) = payload.units.as_deref() {
        if units != "metric" {
            return Err(ProviderError::Malformed(format!("unsupported units {units:?}")));
        }
    }
    let mut points = Vec::with_capacity(hours as usize);
    for entry in &payload.hourly.data {
        let timestamp = NaiveDateTime::parse_from_str(&entry.date, "%Y-%m-%dT%H:%M:%S")
            .map_err(|e| ProviderError::Malformed(format!("date {:?}: {e}", entry.date)))?;
        if timestamp < start {
            continue;
        }
        let expected = start + Duration::hours(points.len() as i64);
        if timestamp != expected {
            return Err(ProviderError::Malformed(format!(
                "hourly series has a gap: expected {expected}, found {timestamp}"
            )));
        }
        if !entry.temperature.is_finite() {
            return Err(ProviderError::Malformed("non-finite temperature".into()));
        }
        let temperature_k = celsius_to_kelvin(entry.temperature);
        if temperature_k <= 0.0 {
            return Err(ProviderError::Malformed("temperature below absolute zero".into()));
        }
        points.push(TempPoint {
            hour_offset: points.len() as u32,
            timestamp,
            temperature_k,
        });
        if points.len() == hours as usize {
            return Ok(points);
        }
    }
    Err(ProviderError::Malformed(format!(
        "expected {hours} hourly points from {start}, got {}",
        points.len()
    )))
}
