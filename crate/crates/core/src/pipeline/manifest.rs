use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cloud::RigidTransform;
use crate::error::{Error, Result};
use crate::metrics::EvalThresholds;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// A list of cloud pairs with ground-truth transforms, driving suite runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairManifest {
    pub schema_version: u32,
    #[serde(default)]
    pub settings: ManifestSettings,
    pub pairs: Vec<ManifestPair>,
}

/// Dataset-level defaults a manifest may carry. They seed the pipeline
/// configuration below config files and flags in precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifestSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voxel_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<EvalThresholds>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestPair {
    pub id: String,
    pub source: PathBuf,
    pub target: PathBuf,
    /// Ground truth mapping source onto target, as a 4×4 row-major matrix.
    pub gt: RigidTransform,
}

impl PairManifest {
    pub fn new(settings: ManifestSettings, pairs: Vec<ManifestPair>) -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            settings,
            pairs,
        }
    }

    /// Loads and validates a manifest. Relative pair paths are resolved
    /// against the manifest's directory; every referenced file must exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut manifest: PairManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            line: e.line(),
            offset: e.column() as u64,
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for pair in &mut manifest.pairs {
            if pair.source.is_relative() {
                pair.source = base.join(&pair.source);
            }
            if pair.target.is_relative() {
                pair.target = base.join(&pair.target);
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported manifest schema_version {} (expected {MANIFEST_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.pairs.is_empty() {
            return Err(Error::InvalidParameter("manifest has no pairs".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for pair in &self.pairs {
            if pair.id.contains(',') || pair.id.contains('\n') {
                return Err(Error::InvalidParameter(format!(
                    "pair id {:?} must not contain commas or newlines",
                    pair.id
                )));
            }
            if !seen.insert(&pair.id) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate pair id {:?}",
                    pair.id
                )));
            }
            for p in [&pair.source, &pair.target] {
                if !p.exists() {
                    return Err(Error::InvalidParameter(format!(
                        "pair {:?}: file {} does not exist",
                        pair.id,
                        p.display()
                    )));
                }
            }
        }
        if let Some(v) = self.settings.voxel_size {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "manifest voxel_size must be positive, got {v}"
                )));
            }
        }
        if let Some(t) = &self.settings.thresholds {
            t.validate()?;
        }
        Ok(())
    }
}
