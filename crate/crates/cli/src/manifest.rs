use crate::config::{RunConfig, FORMAT_VERSION};
use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    /// Fully resolved configuration; rerunning with it reproduces the outputs.
    pub config: RunConfig,
    pub replica_seeds: Vec<u64>,
    /// sha256 of every emitted file, keyed by file name.
    pub outputs: BTreeMap<String, String>,
    /// sha256 of consumed files, keyed by path.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, String>,
    /// Free-form run annotations, such as the contour convention.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut f = File::open(path).map_err(|e| CliError::runtime("io", format!("{}: {e}", path.display())))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let k = f.read(&mut buf)?;
        if k == 0 {
            break;
        }
        h.update(&buf[..k]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(command: &str, config: RunConfig, replica_seeds: Vec<u64>, started: String) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started,
            finished: String::new(),
            config,
            replica_seeds,
            outputs: BTreeMap::new(),
            inputs: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    /// Hashes `files` in `dir`, stamps the end time and writes the manifest.
    pub fn finish(mut self, dir: &Path, files: &[&str]) -> Result<Self, CliError> {
        for f in files {
            self.outputs.insert(f.to_string(), sha256_file(&dir.join(f))?);
        }
        self.finished = now();
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes") + "\n";
        std::fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(self)
    }

    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::validation("manifest", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::validation("manifest", format!("{}: {e}", path.display())))
    }

    /// Checks every recorded output digest against the files in `dir`.
    pub fn verify(&self, dir: &Path) -> Result<(), CliError> {
        for (name, want) in &self.outputs {
            let path = dir.join(name);
            if !path.exists() {
                return Err(CliError::validation("digest", format!("{} is missing", path.display())));
            }
            let got = sha256_file(&path)?;
            if &got != want {
                return Err(CliError::validation(
                    "digest",
                    format!("{} has digest {got}, manifest records {want}", path.display()),
                ));
            }
        }
        Ok(())
    }
}
