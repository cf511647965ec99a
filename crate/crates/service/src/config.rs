use std::net::SocketAddr;
use std::path::PathBuf;

use crate::provider::{Location, DEFAULT_BASE_URL};

pub const DEFAULT_BIND_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_MODEL_DIR: &str = "models";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    Mock,
    Real,
}

impl std::str::FromStr for ProviderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mock" => Ok(ProviderKind::Mock),
            "real" => Ok(ProviderKind::Real),
            other => Err(format!("WEATHER_PROVIDER must be `real` or `mock`, got {other:?}")),
        }
    }
}

/// Settings read from `WEATHER_API_KEY`, `WEATHER_BASE_URL`,
/// `WEATHER_PROVIDER`, `MODEL_DIR` and `BIND_ADDR`.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind_addr: SocketAddr,
    pub model_dir: PathBuf,
    pub provider: ProviderKind,
    pub api_key: Option<String>,
    pub base_url: String,
    pub location: Location,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind_addr: DEFAULT_BIND_ADDR.parse().expect("valid address"),
            model_dir: PathBuf::from(DEFAULT_MODEL_DIR),
            provider: ProviderKind::Mock,
            api_key: None,
            base_url: DEFAULT_BASE_URL.to_string(),
            location: Location::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let mut cfg = ServiceConfig::default();
        if let Some(v) = get("BIND_ADDR") {
            cfg.bind_addr = v
                .parse()
                .map_err(|e| format!("BIND_ADDR {v:?}: {e}"))?;
        }
        if let Some(v) = get("MODEL_DIR") {
            cfg.model_dir = PathBuf::from(v);
        }
        if let Some(v) = get("WEATHER_PROVIDER") {
            cfg.provider = v.parse()?;
        }
        cfg.api_key = get("WEATHER_API_KEY");
        if let Some(v) = get("WEATHER_BASE_URL") {
            cfg.base_url = v;
        }
        Ok(cfg)
    }
}
