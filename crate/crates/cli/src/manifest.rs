use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::StageError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Start and finish time of one stage, RFC 3339 in UTC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTimes {
    pub started: String,
    pub finished: String,
}

/// Record of a run directory. Output paths are relative to the directory
/// that holds the manifest, keyed by artifact name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: BTreeMap<String, PathBuf>,
    pub timestamps: BTreeMap<String, StageTimes>,
}

impl RunManifest {
    pub fn new(config_path: &Path, seed: u64) -> Self {
        RunManifest {
            config_path: config_path.to_path_buf(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            outputs: BTreeMap::new(),
            timestamps: BTreeMap::new(),
        }
    }

    pub fn load(dir: &Path) -> Result<Self, StageError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| StageError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| StageError::Input(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<(), StageError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(dir.join(MANIFEST_FILE), text).map_err(|e| StageError::io(dir.join(MANIFEST_FILE), e))
    }

    /// Absolute path of a listed artifact; missing entries or files are errors.
    pub fn input(&self, dir: &Path, key: &str) -> Result<PathBuf, StageError> {
        let rel = self
            .outputs
            .get(key)
            .ok_or_else(|| StageError::Input(format!("manifest lists no `{key}` output; run the stage that produces it first")))?;
        let path = dir.join(rel);
        if !path.is_file() {
            return Err(StageError::Input(format!("manifest lists {} but the file is missing", path.display())));
        }
        Ok(path)
    }
}
