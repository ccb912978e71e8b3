//! Run manifests: one JSON sidecar per output, `<out>.manifest.json`,
//! recording the command, its resolved flags and digests of every file read
//! and written. Nothing time- or host-dependent goes in, so rerunning a
//! manifest reproduces it too.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub args: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn digest(path: &Path) -> Result<FileDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let hash = Sha256::digest(&bytes);
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the sidecar for `outputs[0]`.
pub fn write(
    command: &'static str,
    args: &impl Serialize,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<(), CliError> {
    let manifest = RunManifest {
        tool: "tdabm",
        version: env!("CARGO_PKG_VERSION"),
        command,
        args: serde_json::to_value(args).map_err(|e| CliError::Validation(e.to_string()))?,
        inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?,
        outputs: outputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?,
    };
    let path = sidecar_path(outputs[0]);
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Validation(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

/// The `args` object of an existing sidecar, if there is one.
pub fn read_args(out: &Path) -> Option<Value> {
    let text = fs::read_to_string(sidecar_path(out)).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    v.get("args").cloned()
}
