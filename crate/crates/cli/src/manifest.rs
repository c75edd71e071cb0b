//! Run manifests: enough to rerun a command and get identical outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: BTreeMap<&'static str, String>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub data: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            tool: "phylolink",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: config.seed,
            config: config.to_pairs(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            data: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn stat(&mut self, key: &str, value: impl ToString) {
        self.data.insert(key.to_string(), value.to_string());
    }

    /// Writes `manifest.json` into `dir`; outputs are listed sorted.
    pub fn write(mut self, dir: &Path) -> Result<PathBuf, CliError> {
        self.outputs.sort();
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Numerical(format!("manifest serialization: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(CliError::io(&path))?;
        Ok(path)
    }
}
