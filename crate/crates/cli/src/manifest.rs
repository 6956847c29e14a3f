//! Per-run manifest: the command line, resolved parameters, seed and the
//! artifacts written, serialised as JSON next to the outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector, program name excluded; rerunning it reproduces
    /// the outputs.
    pub argv: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub artifacts: Vec<String>,
    pub diagnostics: BTreeMap<String, String>,
    /// `ok`, or the error that stopped the run.
    pub status: String,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>) -> Self {
        Self {
            command: command.to_owned(),
            argv,
            parameters: BTreeMap::new(),
            seed: None,
            artifacts: Vec::new(),
            diagnostics: BTreeMap::new(),
            status: "ok".to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_owned(), value.to_string());
    }

    pub fn diag(&mut self, key: &str, value: impl ToString) {
        self.diagnostics.insert(key.to_owned(), value.to_string());
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_atomic(path, &json)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

/// `out.csv` -> `out.csv.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
