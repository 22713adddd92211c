use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// What a command did, written as JSON next to its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_ms: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: &impl Serialize) -> Self {
        Self {
            subcommand: subcommand.into(),
            parameters: serde_json::to_value(parameters).expect("arguments serialize"),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_ms: 0.0,
            warnings: Vec::new(),
        }
    }

    /// `OUT.manifest.json` for an output file `OUT`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}
