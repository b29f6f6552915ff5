use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::defaults;

#[derive(Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub shapeopt: &'static str,
    pub shapeopt_cli: &'static str,
}

/// Written to `manifest.json` on every run that reaches its output directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    /// SHA-256 of the raw config bytes, lowercase hex.
    pub config_sha256: String,
    pub versions: Versions,
    pub level: Option<usize>,
    pub threads: usize,
    pub seeds: Vec<u64>,
    pub stages: Vec<Stage>,
    pub outputs: Vec<String>,
    pub status: &'static str,
    pub exit_code: i32,
    pub error: Option<String>,
    pub defaults: Vec<defaults::Default>,
}

pub fn config_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: &str, config: &Path, bytes: &[u8]) -> Self {
        Self {
            command: command.to_string(),
            config: config.display().to_string(),
            config_sha256: config_hash(bytes),
            versions: Versions { shapeopt: shapeopt::VERSION, shapeopt_cli: env!("CARGO_PKG_VERSION") },
            level: None,
            threads: defaults::THREADS,
            seeds: Vec::new(),
            stages: Vec::new(),
            outputs: Vec::new(),
            status: "ok",
            exit_code: 0,
            error: None,
            defaults: defaults::table(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), text + "\n")
    }
}
