use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of one run: what produced it and every file it wrote.
///
/// Timestamps make the manifest itself differ between runs; the files it
/// lists do not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub started: String,
    pub finished: String,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let m: RunManifest = serde_json::from_str(text)?;
        for f in &m.files {
            let p = Path::new(&f.path);
            if p.is_absolute() || p.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
                return Err(Error::Parse(format!("manifest path `{}` leaves the run directory", f.path)));
            }
            if f.sha256.len() != 64 || !f.sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(Error::Parse(format!("malformed checksum for `{}`", f.path)));
            }
        }
        Ok(m)
    }
}

/// Writes run artifacts in order and records their checksums.
pub(crate) struct ArtifactWriter<'a> {
    dir: &'a Path,
    pub files: Vec<FileEntry>,
}

impl<'a> ArtifactWriter<'a> {
    pub fn new(dir: &'a Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| Error::Config(format!("output directory {} is not writable: {e}", dir.display())))?;
        let probe = dir.join(".ldslope-write-test");
        fs::write(&probe, b"")
            .and_then(|_| fs::remove_file(&probe))
            .map_err(|e| Error::Config(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(ArtifactWriter { dir, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(
        self,
        command: &str,
        config: &ExperimentConfig,
        started: String,
        warnings: Vec<String>,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: "ldslope".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: config.hash(),
            config: config.clone(),
            started,
            finished: now(),
            files: self.files,
            warnings,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join(MANIFEST_FILE), text)?;
        Ok(manifest)
    }
}

pub(crate) fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Re-read a run directory and list every file that is missing or whose
/// checksum differs from the manifest.
pub fn check_manifest(dir: &Path) -> Result<(RunManifest, Vec<String>)> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest = RunManifest::from_json_str(&text)?;
    let mut problems = Vec::new();
    for f in &manifest.files {
        match fs::read(dir.join(&f.path)) {
            Ok(bytes) if sha256_hex(&bytes) == f.sha256 => {}
            Ok(_) => problems.push(format!("{}: checksum mismatch", f.path)),
            Err(e) => problems.push(format!("{}: {e}", f.path)),
        }
    }
    Ok((manifest, problems))
}
