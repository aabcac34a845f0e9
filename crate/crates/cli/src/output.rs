//! Output plumbing: atomic file writes, input digests, and the run manifest.
//!
//! Commands compute every output in memory first and only then flush, so an
//! error never leaves a partial file behind. Each file is written to a
//! temporary sibling and renamed into place.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::CliError;

#[derive(Debug, Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
    bytes: usize,
}

/// Record of one command invocation: resolved configuration, digests of the
/// exact bytes read, and the files written. Serialized as
/// `run_manifest.json`, always the last file flushed.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    command: String,
    config: BTreeMap<String, String>,
    inputs: Vec<InputRecord>,
    outputs: Vec<String>,
    notes: Vec<String>,
    duration_ms: u128,
}

/// Collects outputs for one command run and flushes them atomically.
pub struct RunContext {
    out_dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
    pending: Vec<(PathBuf, Vec<u8>)>,
}

impl RunContext {
    pub fn new(command: &str, out_dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                config: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                notes: Vec::new(),
                duration_ms: 0,
            },
            started: Instant::now(),
            pending: Vec::new(),
        })
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.manifest.config.insert(key.to_string(), value.to_string());
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.manifest.notes.push(text.into());
    }

    /// Reads an input file whole, recording its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.manifest.inputs.push(InputRecord {
            path: path.display().to_string(),
            sha256: hex,
            bytes: bytes.len(),
        });
        Ok(bytes)
    }

    /// Queues one output file; nothing touches the filesystem until
    /// [`RunContext::flush`].
    pub fn stage(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.pending.push((self.out_dir.join(name), contents.into()));
        self.manifest.outputs.push(name.to_string());
    }

    /// Writes every staged file atomically, then the manifest.
    pub fn flush(mut self) -> Result<(), CliError> {
        for (path, bytes) in std::mem::take(&mut self.pending) {
            write_atomic(&path, &bytes)?;
        }
        self.manifest.outputs.push("run_manifest.json".to_string());
        self.manifest.duration_ms = self.started.elapsed().as_millis();
        let manifest = serde_json::to_vec_pretty(&self.manifest)
            .map_err(|e| CliError::Input(format!("manifest serialization failed: {e}")))?;
        write_atomic(&self.out_dir.join("run_manifest.json"), &manifest)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::Input(format!("cannot rename into {}: {e}", path.display())))
}
