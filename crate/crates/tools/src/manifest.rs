//! Reproduction record written next to every output file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ToolError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Every flag value after defaults were applied.
    pub parameters: BTreeMap<String, Value>,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// The one field that is not reproducible.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, Value>, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            tool_version: TOOL_VERSION.to_string(),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    /// `results.csv` -> `results.csv.manifest.json`.
    pub fn sidecar_path(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_beside(&self, out: &Path) -> Result<PathBuf, ToolError> {
        let path = Self::sidecar_path(out);
        let mut text = serde_json::to_string_pretty(self).map_err(|e| ToolError::Parse(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| ToolError::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, ToolError> {
        let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| ToolError::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("curve.csv");
        let mut params = BTreeMap::new();
        params.insert("eta".to_string(), Value::from(vec![1.0, 2.0]));
        let m = RunManifest::new("curve", params, Some(7));
        let path = m.write_beside(&out).unwrap();
        assert_eq!(path, dir.path().join("curve.csv.manifest.json"));
        assert_eq!(RunManifest::read(&path).unwrap(), m);
        assert!(m.timestamp.ends_with('Z'));
    }
}
