use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Record of one invocation. Replaying `config` through `--config`
/// reproduces the outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub base_seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, base_seed: Option<u64>, inputs: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            version: superres_core::VERSION.to_string(),
            config,
            base_seed,
            inputs,
            outputs: Vec::new(),
            duration_secs: 0.0,
        }
    }

    pub fn finish(&mut self, start: Instant) {
        self.duration_secs = start.elapsed().as_secs_f64();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

/// `result.json` → `result.manifest.json`.
pub fn path_for(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}
