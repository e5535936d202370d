//! Model files.
//!
//! ```text
//! schwa-model v1
//! kind <logistic|mlp|gbdt>
//! dimension <n>
//! <one line of JSON: model, feature space, hyperparameters, split>
//! sha256 <hex digest of every byte above this line>
//! ```
//!
//! The version line is checked before the checksum so that a file from a newer
//! release reports a version mismatch rather than corruption.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GbdtHyper, LogisticHyper, MlpHyper, Model, ModelError};
use crate::features::FeatureSpace;
use crate::lexicon::SplitSpec;

pub const MAGIC: &str = "schwa-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyper {
    Logistic(LogisticHyper),
    Mlp(MlpHyper),
    Gbdt(GbdtHyper),
}

/// A model together with what is needed to use and reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub model: Model,
    pub features: Option<FeatureSpace>,
    pub hyper: Option<Hyper>,
    pub split: Option<SplitSpec>,
}

impl SavedModel {
    pub fn bare(model: Model) -> Self {
        SavedModel { model, features: None, hyper: None, split: None }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ModelError> {
        if let Some(fs) = &self.features {
            if fs.dimension() != self.model.dimension() {
                return Err(ModelError::DimensionMismatch { expected: self.model.dimension(), found: fs.dimension() });
            }
        }
        let payload = serde_json::to_string(self).map_err(|e| ModelError::Format(e.to_string()))?;
        let mut out = format!(
            "{MAGIC} v{FORMAT_VERSION}\nkind {}\ndimension {}\n{payload}\n",
            self.model.kind(),
            self.model.dimension()
        );
        let digest = hex(&Sha256::digest(out.as_bytes()));
        out.push_str("sha256 ");
        out.push_str(&digest);
        out.push('\n');
        Ok(out.into_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let text = std::str::from_utf8(bytes).map_err(|_| ModelError::ChecksumMismatch)?;
        let first = text.split('\n').next().unwrap_or_default();
        let version = first
            .strip_prefix(MAGIC)
            .and_then(|rest| rest.strip_prefix(" v"))
            .ok_or_else(|| ModelError::Format(format!("bad magic line `{}`", first.chars().take(40).collect::<String>())))?;
        let version: u32 = version.parse().map_err(|_| ModelError::Format(format!("bad version `{version}`")))?;
        if version != FORMAT_VERSION {
            return Err(ModelError::VersionMismatch { found: version, expected: FORMAT_VERSION });
        }
        let body = text.strip_suffix('\n').ok_or(ModelError::ChecksumMismatch)?;
        let split_at = body.rfind("\nsha256 ").ok_or(ModelError::ChecksumMismatch)? + 1;
        let (signed, trailer) = body.split_at(split_at);
        let claimed = trailer.strip_prefix("sha256 ").ok_or(ModelError::ChecksumMismatch)?;
        if claimed != hex(&Sha256::digest(signed.as_bytes())) {
            return Err(ModelError::ChecksumMismatch);
        }
        let mut lines = signed.lines().skip(1);
        let mut header = |key: &str| -> Result<String, ModelError> {
            let line = lines.next().unwrap_or_default();
            line.strip_prefix(key)
                .and_then(|v| v.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| ModelError::Format(format!("expected `{key}` line, found `{line}`")))
        };
        let kind = header("kind")?;
        let dimension: usize =
            header("dimension")?.parse().map_err(|_| ModelError::Format("bad dimension".into()))?;
        let payload = lines.next().ok_or_else(|| ModelError::Format("missing payload".into()))?;
        let saved: SavedModel = serde_json::from_str(payload).map_err(|e| ModelError::Format(e.to_string()))?;
        if saved.model.kind() != kind || saved.model.dimension() != dimension {
            return Err(ModelError::Format("header does not match payload".into()));
        }
        if let Model::Gbdt(g) = &saved.model {
            g.validate().map_err(ModelError::Format)?;
        }
        Ok(saved)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn save_model(saved: &SavedModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    let bytes = saved.to_bytes()?;
    fs::write(path, bytes).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel, ModelError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })?;
    SavedModel::from_bytes(&bytes)
}
