//! Run manifests: enough to re-run a command and reproduce its outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ibcurve_core::Error;
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<String>,
    /// Flags exactly as given on the command line.
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<String>,
    /// Arguments after the program name, with the effective seed made explicit.
    pub argv: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String], input: Option<&Path>, seed: Option<u64>, outputs: &[PathBuf]) -> Self {
        let mut argv = argv.to_vec();
        if let Some(s) = seed {
            if !argv.iter().any(|a| a == "--seed" || a.starts_with("--seed=")) {
                argv.push("--seed".into());
                argv.push(s.to_string());
            }
        }
        Self {
            command: command.to_string(),
            input: input.map(|p| p.display().to_string()),
            params: flag_map(&argv),
            seed,
            tool_version: TOOL_VERSION.into(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            argv,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// `--flag value` and `--flag=value` pairs; bare flags map to "true".
fn flag_map(argv: &[String]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < argv.len() {
        if let Some(flag) = argv[i].strip_prefix("--") {
            if let Some((k, v)) = flag.split_once('=') {
                out.insert(k.to_string(), v.to_string());
            } else if i + 1 < argv.len() && !argv[i + 1].starts_with("--") {
                out.insert(flag.to_string(), argv[i + 1].clone());
                i += 1;
            } else {
                out.insert(flag.to_string(), "true".into());
            }
        }
        i += 1;
    }
    out
}

/// `curve.csv` → `curve.manifest.json`, in the same directory.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}
