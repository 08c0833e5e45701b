//! Run manifests: every command writes one next to its outputs, and
//! `--from-manifest` re-runs the stored resolved config, reproducing
//! the outputs byte-for-byte.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::output::VERSION;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: Config,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: Config) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            config,
            outputs: Vec::new(),
            duration_secs: 0.0,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).context("malformed manifest")
    }
}
