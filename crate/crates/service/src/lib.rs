//! HTTP forecasting service.
//!
//! Hourly temperature forecasts from a weather provider are featurized per
//! each stored model's feature spec and turned into irradiance predictions.
//!
//! | Route | Response |
//! |---|---|
//! | `GET /health` | `{"status":"ok"}` |
//! | `GET /models` | model id, kind, file time and recorded metrics per model |
//! | `GET /forecast?model=<id>&hours=<n>&clamp=<bool>` | forecast points |
//! | `GET /evaluation` | latest comparison report |
//! | `POST /reload` | rescans the model directory |

pub mod clock;
pub mod config;
pub mod error;
pub mod provider;
pub mod store;

use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use heliocast_core::api::{
    ForecastPoint, Health, ModelInfo, ReloadSummary, DEFAULT_FORECAST_HOURS, EVALUATION_FILE,
    MAX_FORECAST_HOURS,
};
use heliocast_core::harness::{ComparisonReport, TrainedModel};
use serde::Deserialize;
use tokio::net::TcpListener;

pub use clock::{Clock, FixedClock, SystemClock};
pub use config::{ProviderKind, ServiceConfig};
pub use error::ApiError;
pub use provider::{Location, MeteosourceClient, Provider, ProviderError, TempPoint};
pub use store::ModelStore;

use axum::http::StatusCode;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<ModelStore>,
    pub provider: Arc<Provider>,
    pub clock: Arc<dyn Clock>,
    pub location: Location,
}

impl AppState {
    pub fn new(store: ModelStore, provider: Provider, clock: impl Clock + 'static) -> Self {
        AppState {
            store: Arc::new(store),
            provider: Arc::new(provider),
            clock: Arc::new(clock),
            location: Location::default(),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/models", get(models))
        .route("/forecast", get(forecast))
        .route("/evaluation", get(evaluation))
        .route("/reload", post(reload))
        .fallback(|| async { ApiError::not_found("not_found", "no such route") })
        .with_state(state)
}

/// Runs one model over a temperature series.
pub fn forecast_points(
    model_id: &str,
    model: &TrainedModel,
    temps: &[TempPoint],
    clamp: bool,
) -> Result<Vec<ForecastPoint>, ApiError> {
    let spec = model.feature_spec;
    if spec.validate().is_err() || spec.n_features() != model.estimator.input_dim() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "feature_mismatch",
            format!(
                "model {model_id} expects {} inputs but its feature spec yields {}",
                model.estimator.input_dim(),
                spec.n_features()
            ),
        ));
    }
    temps
        .iter()
        .map(|t| {
            let y = model
                .predict(&spec.row(t.timestamp, t.temperature_k))
                .map_err(|e| ApiError::internal(e.to_string()))?;
            if !y.is_finite() {
                return Err(ApiError::internal(format!(
                    "model {model_id} produced a non-finite prediction"
                )));
            }
            Ok(ForecastPoint {
                timestamp: t.timestamp,
                temperature_k: t.temperature_k,
                predicted_wm2: if clamp { y.max(0.0) } else { y },
                model_id: model_id.to_string(),
            })
        })
        .collect()
}

async fn health() -> Json<Health> {
    Json(Health::ok())
}

async fn models(State(state): State<AppState>) -> Json<Vec<ModelInfo>> {
    Json(state.store.snapshot().values().map(|m| m.info.clone()).collect())
}

#[derive(Deserialize)]
struct ForecastQuery {
    model: Option<String>,
    hours: Option<String>,
    clamp: Option<String>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

async fn forecast(
    State(state): State<AppState>,
    query: Result<Query<ForecastQuery>, QueryRejection>,
) -> Result<Json<Vec<ForecastPoint>>, ApiError> {
    let Query(q) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let model_id = q
        .model
        .filter(|m| !m.is_empty())
        .ok_or_else(|| ApiError::bad_request("query parameter `model` is required"))?;
    let hours = match q.hours.as_deref() {
        None => DEFAULT_FORECAST_HOURS,
        Some(h) => h
            .parse::<u32>()
            .ok()
            .filter(|h| (1..=MAX_FORECAST_HOURS).contains(h))
            .ok_or_else(|| {
                ApiError::bad_request(format!(
                    "`hours` must be an integer in 1..={MAX_FORECAST_HOURS}, got {h:?}"
                ))
            })?,
    };
    let clamp = match q.clamp.as_deref() {
        None => false,
        Some(c) => parse_bool(c)
            .ok_or_else(|| ApiError::bad_request(format!("`clamp` must be true or false, got {c:?}")))?,
    };
    let stored = state
        .store
        .get(&model_id)
        .ok_or_else(|| ApiError::not_found("model_not_found", format!("no model named {model_id:?}")))?;

    let start = clock::next_full_hour(clock::to_local(state.clock.now()));
    let temps = state
        .provider
        .fetch_hourly_temperature(state.location, start, hours)
        .await?;
    forecast_points(&model_id, &stored.model, &temps, clamp).map(Json)
}

async fn evaluation(State(state): State<AppState>) -> Result<Json<ComparisonReport>, ApiError> {
    let path = state.store.dir().join(EVALUATION_FILE);
    let text = match tokio::fs::read_to_string(&path).await {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(ApiError::not_found(
                "evaluation_not_found",
                "no evaluation report has been written to the model directory",
            ))
        }
        Err(e) => return Err(ApiError::internal(e.to_string())),
    };
    serde_json::from_str(&text)
        .map(Json)
        .map_err(|e| ApiError::internal(format!("evaluation report is unreadable: {e}")))
}

async fn reload(State(state): State<AppState>) -> Result<Json<ReloadSummary>, ApiError> {
    let store = state.store.clone();
    tokio::task::spawn_blocking(move || store.reload())
        .await
        .map(Json)
        .map_err(|e| ApiError::internal(e.to_string()))
}

/// Builds the provider named by `cfg`.
pub fn provider_from_config(cfg: &ServiceConfig) -> Result<Provider, ProviderError> {
    Ok(match cfg.provider {
        ProviderKind::Mock => Provider::Mock,
        ProviderKind::Real => {
            Provider::Real(MeteosourceClient::new(cfg.base_url.clone(), cfg.api_key.clone())?)
        }
    })
}

/// Serves `state` on `listener` until ctrl-c.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Loads models, binds `cfg.bind_addr` and serves with the system clock.
pub async fn run(cfg: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let provider = provider_from_config(&cfg)?;
    let (store, summary) = ModelStore::open(&cfg.model_dir);
    tracing::info!(
        models = summary.models,
        skipped = summary.skipped.len(),
        dir = %cfg.model_dir.display(),
        provider = provider.name(),
        "model store loaded"
    );
    let mut state = AppState::new(store, provider, SystemClock);
    state.location = cfg.location;
    let listener = TcpListener::bind(cfg.bind_addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve(listener, state).await?;
    Ok(())
}
