//! Run manifests and the append-only results ledger.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub command: String,
    pub seed: u64,
    pub params: Value,
    pub dataset: Option<DatasetInfo>,
    pub package_version: String,
    pub started: String,
    pub finished: String,
    pub results: Value,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, params: Value) -> Self {
        let t = now();
        RunManifest {
            version: crate::artifact::VERSION,
            command: command.to_owned(),
            seed,
            params,
            dataset: None,
            package_version: env!("CARGO_PKG_VERSION").to_owned(),
            started: t.clone(),
            finished: t,
            results: Value::Null,
        }
    }

    pub fn with_dataset(mut self, dir: &Path, files: &[PathBuf]) -> Result<Self> {
        self.dataset =
            Some(DatasetInfo { path: dir.display().to_string(), sha256: crate::mnist::sha256_files(files)? });
        Ok(self)
    }

    pub fn finish(&mut self, results: Value) {
        self.finished = now();
        self.results = results;
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Appends one compact JSON object as a line.
pub fn append_jsonl<T: Serialize>(path: &Path, row: &T) -> Result<()> {
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
    let mut line = serde_json::to_vec(row)?;
    line.push(b'\n');
    f.write_all(&line).map_err(|e| Error::io(path, e))
}
