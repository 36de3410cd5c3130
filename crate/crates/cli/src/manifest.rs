//! Run manifest: everything needed to reproduce a run, written next to
//! the outputs. Every output file references this manifest by path and
//! config hash.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_sha256: String,
    pub config: RunConfig,
    pub workers: usize,
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub started_utc: String,
    pub finished_utc: Option<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &RunConfig, workers: usize) -> Self {
        Self {
            tool: "fmpair".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            config_sha256: config_hash(config),
            config: config.clone(),
            workers,
            tol_rel: config.qve.tol_rel,
            tol_abs: config.qve.tol_abs,
            started_utc: chrono::Utc::now().to_rfc3339(),
            finished_utc: None,
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Tag line placed at the top of CSV outputs.
    pub fn csv_reference(&self) -> String {
        format!("# manifest: {MANIFEST_FILE} sha256:{}", self.config_sha256)
    }

    pub fn finish_and_write(mut self, out_dir: &Path) -> CliResult<()> {
        self.finished_utc = Some(chrono::Utc::now().to_rfc3339());
        let path = out_dir.join(MANIFEST_FILE);
        let body = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))?;
        Ok(())
    }
}

/// Hash of the resolved configuration (canonical JSON form), so manifests
/// are insensitive to TOML whitespace.
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
