//! Regression toolkit and solar irradiance forecasting pipeline.
//!
//! The crate covers the full offline workflow: parsing pyranometer records,
//! feature extraction, correlation-based variable selection, eight regression
//! estimators implemented from scratch, the four evaluation metrics, and a
//! comparison harness with model persistence and a synthetic data generator.
//!
//! ```
//! use heliocast_core::dataset::{extract_features, FeatureSpec};
//! use heliocast_core::harness::synthetic::generate_synthetic;
//! use heliocast_core::trees::{fit_gbr, GbrConfig};
//!
//! let records = generate_synthetic(2, 7).unwrap();
//! let ds = extract_features(&records, &FeatureSpec::default()).unwrap();
//! let cfg = GbrConfig { stage_count: 10, ..GbrConfig::default() };
//! let model = fit_gbr(&ds, &cfg).unwrap();
//! let y = model.predict(&[300.0, 12.0]).unwrap();
//! assert!(y.is_finite());
//! ```

pub mod analysis;
pub mod api;
pub mod dataset;
mod error;
pub mod harness;
pub mod linalg;
pub mod linear_models;
pub mod metrics;
pub mod neighbors;
pub mod rng;
pub mod svr;
pub mod trees;

pub use error::{Error, Result};
