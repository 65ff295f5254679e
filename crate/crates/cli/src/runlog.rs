//! Append-only NDJSON run records.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const ENV_VAR: &str = "BCW_RUNLOG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub timestamp: String,
    pub command: Vec<String>,
    pub config: Value,
    pub version: String,
    /// `name → sha256` of the canonical JSON of each input spec.
    pub input_digests: Vec<(String, String)>,
    pub outputs: Vec<PathBuf>,
}

/// SHA-256 of the canonical JSON text (keys sorted) of `value`.
pub fn digest(value: &Value) -> String {
    // serde_json maps are ordered, so this text is canonical
    let text = serde_json::to_string(value).expect("value serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunRecord {
    pub fn new(command: Vec<String>, config: Value) -> Self {
        RunRecord {
            timestamp: chrono::Utc::now().to_rfc3339(),
            command,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_digests: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, name: &str, value: &Value) {
        self.input_digests.push((name.to_string(), digest(value)));
    }
}

/// Appends one line to `path`. Failures are reported as warnings only.
pub fn persist_run(record: &RunRecord, path: &Path) {
    let line = match serde_json::to_string(record) {
        Ok(l) => l,
        Err(e) => {
            log::warn!("run record not serializable: {e}");
            return;
        }
    };
    let written = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .and_then(|mut f| writeln!(f, "{line}"));
    if let Err(e) = written {
        eprintln!("warning: could not append run record to {}: {e}", path.display());
    }
}
