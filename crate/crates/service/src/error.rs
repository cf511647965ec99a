use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use heliocast_core::api::ErrorBody;

use crate::provider::ProviderError;

/// An HTTP error rendered as `{code, message}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_parameter", message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<ProviderError> for ApiError {
    fn from(e: ProviderError) -> Self {
        let (status, code) = match &e {
            ProviderError::Config(_) => (StatusCode::SERVICE_UNAVAILABLE, "provider_config"),
            ProviderError::Http { .. } => (StatusCode::BAD_GATEWAY, "provider_unavailable"),
            ProviderError::Malformed(_) => (StatusCode::BAD_GATEWAY, "provider_malformed"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code.to_string(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}
