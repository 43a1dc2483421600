//! Run manifests: enough resolved state to re-execute a command and check
//! that it sees the same inputs. No timestamps — reruns must be
//! byte-identical.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::ingest::sha256_hex;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize, Deserialize, Debug)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    /// The argument vector after the program name, replayed verbatim by
    /// `rerun`.
    pub argv: Vec<String>,
    pub inputs: Vec<InputDigest>,
    /// Resolved configuration echo for human inspection.
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(
        command: &str,
        argv: &[String],
        inputs: Vec<InputDigest>,
        config: serde_json::Value,
    ) -> Self {
        RunManifest {
            artifact_version: ARTIFACT_VERSION.to_owned(),
            command: command.to_owned(),
            argv: argv.to_vec(),
            inputs,
            config,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: not a run manifest: {e}", path.display())))
    }

    /// Recompute each recorded input digest and fail on any mismatch.
    pub fn verify_inputs(&self) -> CliResult<()> {
        for input in &self.inputs {
            let now = sha256_hex(Path::new(&input.path))?;
            if now != input.sha256 {
                return Err(CliError::usage(format!(
                    "input {} has digest {now}, but the manifest records {}; refusing to rerun",
                    input.path, input.sha256
                )));
            }
        }
        Ok(())
    }
}

pub fn input_digest(path: &Path) -> CliResult<InputDigest> {
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(path)?,
    })
}

/// Serialize a machine-readable artifact deterministically (pretty JSON,
/// trailing newline) and write it.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::numerical(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))
}

/// Manifest destination: the explicit flag, or `<out>` with a
/// `.manifest.json` extension when a machine output is being written.
pub fn manifest_path(explicit: &Option<PathBuf>, out: &Option<PathBuf>) -> Option<PathBuf> {
    explicit
        .clone()
        .or_else(|| out.as_ref().map(|o| o.with_extension("manifest.json")))
}
