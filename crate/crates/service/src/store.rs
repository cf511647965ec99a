//! Directory-backed model registry.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use heliocast_core::api::{ModelInfo, ReloadSummary};
use heliocast_core::harness::{load_model, persist::EXTENSION, TrainedModel};

pub struct StoredModel {
    pub model: TrainedModel,
    pub info: ModelInfo,
}

pub type Snapshot = Arc<BTreeMap<String, Arc<StoredModel>>>;

/// `.hcm` files in one directory, keyed by file stem.
///
/// Reloads build a complete new map and swap it in, so readers always see
/// either the old or the new set of models.
pub struct ModelStore {
    dir: PathBuf,
    models: RwLock<Snapshot>,
}

impl ModelStore {
    pub fn open(dir: impl Into<PathBuf>) -> (Self, ReloadSummary) {
        let store = ModelStore {
            dir: dir.into(),
            models: RwLock::new(Arc::default()),
        };
        let summary = store.reload();
        (store, summary)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn snapshot(&self) -> Snapshot {
        self.models.read().expect("model store lock").clone()
    }

    pub fn get(&self, model_id: &str) -> Option<Arc<StoredModel>> {
        self.snapshot().get(model_id).cloned()
    }

    /// Rescans the directory. Unreadable files are skipped and reported.
    pub fn reload(&self) -> ReloadSummary {
        let (map, skipped) = scan(&self.dir);
        let summary = ReloadSummary {
            models: map.len(),
            skipped,
        };
        *self.models.write().expect("model store lock") = Arc::new(map);
        summary
    }
}

fn scan(dir: &Path) -> (BTreeMap<String, Arc<StoredModel>>, Vec<String>) {
    let mut map = BTreeMap::new();
    let mut skipped = Vec::new();
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) => {
            skipped.push(format!("{}: {e}", dir.display()));
            return (map, skipped);
        }
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == EXTENSION) && p.is_file())
        .collect();
    paths.sort();
    for path in paths {
        let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
            continue;
        };
        match load_model(&path) {
            Ok(model) => {
                let trained_at = std::fs::metadata(&path)
                    .and_then(|m| m.modified())
                    .ok()
                    .map(DateTime::<Utc>::from);
                let info = ModelInfo {
                    model_id: id.clone(),
                    kind: model.kind,
                    display_name: model.display_name.clone(),
                    feature_names: model.feature_spec.feature_names(),
                    trained_at,
                    metrics: model.metrics,
                };
                map.insert(id, Arc::new(StoredModel { model, info }));
            }
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "skipping model file");
                skipped.push(format!("{}: {e}", path.display()));
            }
        }
    }
    (map, skipped)
}
