//! `.hcm` model files.
//!
//! Layout, UTF-8 text:
//!
//! ```text
//! heliocast-model-format 1
//! sha256 <hex digest of the JSON body>
//! <JSON body>
//! ```
//!
//! The body is the serialized [`TrainedModel`]. Floats are written in
//! shortest round-trip decimal form, so a reload reproduces every parameter
//! bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{ModelKind, TrainedModel};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const MAGIC: &str = "heliocast-model-format";
pub const EXTENSION: &str = "hcm";

fn digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

pub fn to_string(model: &TrainedModel) -> Result<String> {
    let body = serde_json::to_string(model)?;
    Ok(format!(
        "{MAGIC} {FORMAT_VERSION}\nsha256 {}\n{body}\n",
        digest(&body)
    ))
}

pub fn from_str(text: &str) -> Result<TrainedModel> {
    let mut lines = text.splitn(3, '\n');
    let header = lines.next().unwrap_or_default();
    if header.is_empty() {
        return Err(Error::Truncated);
    }
    let version = header
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| Error::Corrupted("missing format header".into()))?;
    if version != FORMAT_VERSION.to_string() {
        return Err(Error::VersionMismatch {
            found: version.to_string(),
            expected: FORMAT_VERSION,
        });
    }
    let (Some(checksum_line), Some(body)) = (lines.next(), lines.next()) else {
        return Err(Error::Truncated);
    };
    let expected = checksum_line
        .strip_prefix("sha256 ")
        .ok_or_else(|| Error::Corrupted("missing checksum line".into()))?;
    let body = body.strip_suffix('\n').unwrap_or(body);

    let mut de = serde_json::Deserializer::from_str(body);
    de.disable_recursion_limit();
    let value = serde_json::Value::deserialize(&mut de).map_err(|e| {
        if e.is_eof() {
            Error::Truncated
        } else {
            Error::Corrupted(e.to_string())
        }
    })?;
    if digest(body) != expected {
        return Err(Error::Corrupted("checksum mismatch".into()));
    }
    if let Some(kind) = value["kind"].as_str() {
        kind.parse::<ModelKind>()?;
    }
    if let Some(tag) = value["estimator"]["kind"].as_str() {
        if !is_estimator_tag(tag) {
            return Err(Error::UnknownKind(tag.to_string()));
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Corrupted(e.to_string()))
}

fn is_estimator_tag(tag: &str) -> bool {
    matches!(tag, "mean" | "linear" | "knn" | "tree" | "svr" | "forest" | "gbr")
}

/// Writes atomically: a temporary file in the destination directory is
/// renamed over `path`.
pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, to_string(model)?.as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text)
}

/// Replaces `path` with `bytes` via a same-directory temp file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
