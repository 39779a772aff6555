use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one command run, written next to its primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector, program name excluded.
    pub args: Vec<String>,
    /// Resolved configuration after defaults.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub versions: BTreeMap<String, String>,
    pub timestamp: String,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn versions() -> BTreeMap<String, String> {
    let v = env!("CARGO_PKG_VERSION").to_string();
    ["vix-blackscholes", "vix-model", "vix-single", "vix-mixed", "vix-reference", "vix-calib", "vix-cli"]
        .iter()
        .map(|c| (c.to_string(), v.clone()))
        .collect()
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, config: serde_json::Value, seeds: Vec<u64>, threads: usize) -> Self {
        Self {
            command: command.to_string(),
            args,
            config,
            seeds,
            threads,
            versions: versions(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs: Vec::new(),
        }
    }

    pub fn add_output(&mut self, path: &Path) -> Result<(), CliError> {
        self.outputs.push(OutputFile {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    /// Write beside the first output and return the manifest path.
    pub fn write(&self) -> Result<PathBuf, CliError> {
        let first = self
            .outputs
            .first()
            .ok_or_else(|| CliError::Data("manifest without outputs".into()))?;
        let p = manifest_path(&first.path);
        std::fs::write(&p, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let s = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&s).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}
