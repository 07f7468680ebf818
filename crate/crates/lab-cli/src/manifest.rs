//! Run manifest. It holds no timestamps so that two runs of the same
//! config compare byte for byte; wall-clock data goes to `run_info.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

/// Metric name to value, serialized in key order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Metrics(pub BTreeMap<String, Value>);

impl Metrics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.0
            .insert(key.to_string(), serde_json::to_value(value).expect("metric serializes"));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(Value::as_f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Acceptance criterion, or `None` for smoke entries.
    pub criterion: Option<u8>,
    pub experiment: String,
    pub name: String,
    /// `None` when the entry is decided outside a single run.
    pub pass: Option<bool>,
    pub metrics: Metrics,
    pub artifacts: Vec<String>,
}

impl ManifestEntry {
    pub fn new(criterion: Option<u8>, experiment: &str, name: &str, pass: Option<bool>, metrics: Metrics) -> Self {
        Self {
            criterion,
            experiment: experiment.to_string(),
            name: name.to_string(),
            pass,
            metrics,
            artifacts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub experiments: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl RunManifest {
    pub fn entry(&self, criterion: u8) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.criterion == Some(criterion))
    }

    /// True when no gated entry failed.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass != Some(false))
    }

    pub fn failed_criteria(&self) -> Vec<u8> {
        self.entries
            .iter()
            .filter(|e| e.pass == Some(false))
            .filter_map(|e| e.criterion)
            .collect()
    }

    pub fn has_experiment(&self, name: &str) -> bool {
        self.experiments.iter().any(|e| e == name)
    }

    /// Digest of the numeric content of `entries` (pass flags, metrics,
    /// artifact names).
    pub fn digest_of(entries: &[ManifestEntry]) -> String {
        let bytes = serde_json::to_vec(entries).expect("entries serialize");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| LabError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Wall-clock side data of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunInfo {
    pub started_unix: u64,
    pub finished_unix: u64,
    pub workers: usize,
    pub seconds: BTreeMap<String, f64>,
}
