//! Output directories: a manifest plus hash-stamped result files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Experiment;
use ibnls_core::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub config: Value,
    pub version: String,
    pub hash: String,
}

impl Manifest {
    pub fn new(experiment: &Experiment) -> Result<Manifest> {
        let mut value = serde_json::to_value(experiment)?;
        let config = value["config"].take();
        let command = experiment.name().to_string();
        let version = env!("CARGO_PKG_VERSION").to_string();
        let hash = digest(&command, &config, &version)?;
        Ok(Manifest { command, config, version, hash })
    }

    pub fn read(path: &Path) -> Result<Manifest> {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(path)?)?;
        let expected = digest(&manifest.command, &manifest.config, &manifest.version)?;
        if expected != manifest.hash {
            return Err(Error::InvalidParameter(format!(
                "manifest hash {} does not match its contents ({expected})",
                manifest.hash
            )));
        }
        Ok(manifest)
    }

    pub fn experiment(&self) -> Result<Experiment> {
        Experiment::from_document(&self.command, &self.config.to_string())
    }
}

fn digest(command: &str, config: &Value, version: &str) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(command.as_bytes());
    hasher.update(b"\n");
    hasher.update(serde_json::to_string(config)?.as_bytes());
    hasher.update(b"\n");
    hasher.update(version.as_bytes());
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub enum Content {
    Csv(Vec<u8>),
    Json(Value),
}

pub struct OutputFile {
    pub name: String,
    pub content: Content,
}

impl OutputFile {
    pub fn csv(name: impl Into<String>, bytes: Vec<u8>) -> OutputFile {
        OutputFile { name: name.into(), content: Content::Csv(bytes) }
    }

    pub fn json(name: impl Into<String>, value: Value) -> OutputFile {
        OutputFile { name: name.into(), content: Content::Json(value) }
    }
}

/// Writes the manifest and every file; CSV files get a leading
/// `# manifest <hash>` line and JSON objects a `manifest` key.
pub fn write_outputs(dir: &Path, manifest: &Manifest, files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(MANIFEST_FILE), pretty(&serde_json::to_value(manifest)?)?)?;
    for file in files {
        let bytes = match &file.content {
            Content::Csv(body) => {
                let mut out = format!("# manifest {}\n", manifest.hash).into_bytes();
                out.extend_from_slice(body);
                out
            }
            Content::Json(value) => {
                let mut value = value.clone();
                if let Value::Object(map) = &mut value {
                    map.insert("manifest".into(), Value::String(manifest.hash.clone()));
                }
                pretty(&value)?
            }
        };
        let path = dir.join(&file.name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
    }
    Ok(())
}

pub fn pretty(value: &Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}
