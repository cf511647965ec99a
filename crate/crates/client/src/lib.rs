//! Typed client for the forecasting service's JSON API.

use heliocast_core::api::{ErrorBody, ForecastPoint, Health, ModelInfo, ReloadSummary};
use heliocast_core::harness::ComparisonReport;
use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;

pub const DEFAULT_URL: &str = "http://127.0.0.1:8080";

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service answered with an error payload.
    #[error("service error {status} ({}): {}", .body.code, .body.message)]
    Api { status: StatusCode, body: ErrorBody },
    #[error("unexpected response ({status}): {message}")]
    Decode { status: StatusCode, message: String },
}

#[derive(Debug, Clone)]
pub struct Client {
    http: reqwest::Client,
    base: String,
}

impl Client {
    pub fn new(base_url: &str) -> Self {
        Client {
            http: reqwest::Client::new(),
            base: base_url.trim_end_matches('/').to_string(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn call<T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        query: &[(&str, String)],
    ) -> Result<T, ClientError> {
        let response = self
            .http
            .request(method, format!("{}{path}", self.base))
            .query(query)
            .send()
            .await?;
        let status = response.status();
        let text = response.text().await?;
        if !status.is_success() {
            return Err(match serde_json::from_str::<ErrorBody>(&text) {
                Ok(body) => ClientError::Api { status, body },
                Err(_) => ClientError::Decode {
                    status,
                    message: text,
                },
            });
        }
        serde_json::from_str(&text).map_err(|e| ClientError::Decode {
            status,
            message: e.to_string(),
        })
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        self.call(Method::GET, "/health", &[]).await
    }

    pub async fn models(&self) -> Result<Vec<ModelInfo>, ClientError> {
        self.call(Method::GET, "/models", &[]).await
    }

    pub async fn forecast(
        &self,
        model_id: &str,
        hours: u32,
        clamp: bool,
    ) -> Result<Vec<ForecastPoint>, ClientError> {
        let query = [
            ("model", model_id.to_string()),
            ("hours", hours.to_string()),
            ("clamp", clamp.to_string()),
        ];
        self.call(Method::GET, "/forecast", &query).await
    }

    pub async fn evaluation(&self) -> Result<ComparisonReport, ClientError> {
        self.call(Method::GET, "/evaluation", &[]).await
    }

    pub async fn reload(&self) -> Result<ReloadSummary, ClientError> {
        self.call(Method::POST, "/reload", &[]).await
    }
}
