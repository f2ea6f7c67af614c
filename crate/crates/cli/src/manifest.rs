use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Record of one run. Output digests cover the data files only, so two runs
/// with identical parameters agree on them even though timestamps differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub master_seed: u64,
    pub artifact_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    /// File name to hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Fails unless every path is free or `force` is set.
pub fn check_writable(paths: &[&Path], force: bool) -> Result<(), CliError> {
    for p in paths {
        if p.exists() && !force {
            return Err(CliError::Validation(format!(
                "{} exists; pass --force to overwrite",
                p.display()
            )));
        }
    }
    Ok(())
}

/// Writes the data file and its manifest; returns the data digest.
pub fn write_run(
    out: &Path,
    data: &[u8],
    mut manifest: RunManifest,
    force: bool,
) -> Result<String, CliError> {
    let mpath = manifest_path(out);
    check_writable(&[out, &mpath], force)?;
    let digest = sha256_hex(data);
    let name = out.file_name().unwrap_or_default().to_string_lossy().into_owned();
    manifest.outputs.insert(name, digest.clone());
    fs::write(out, data)?;
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(&manifest)?)?;
    text.push('\n');
    fs::write(mpath, text)?;
    Ok(digest)
}
