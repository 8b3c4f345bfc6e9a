//! Run manifests: a JSON record of the exact config and every emitted
//! artifact with its content hash. Byte-identical for identical
//! (config, seed) runs; wall-clock timings are deliberately kept out and
//! reported on the console instead.

use super::config::PipelineConfig;
use crate::error::{Error, Result};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArtifactRecord {
    /// Path relative to the run directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunSummary {
    pub sequences: usize,
    pub sources: Vec<String>,
    pub train_clips: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub config: PipelineConfig,
    pub summary: Option<RunSummary>,
    pub artifacts: Vec<ArtifactRecord>,
}

impl RunManifest {
    pub fn new(config: PipelineConfig) -> Self {
        Self {
            version: MANIFEST_VERSION,
            config,
            summary: None,
            artifacts: Vec::new(),
        }
    }

    /// Hashes and records a file just written under the run directory.
    pub fn record(&mut self, out_dir: &Path, path: &Path) -> Result<()> {
        let relative = path
            .strip_prefix(out_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        let bytes = std::fs::metadata(path)
            .map_err(crate::error::io_err(path))?
            .len();
        self.artifacts.push(ArtifactRecord {
            path: relative,
            bytes,
            sha256: hash_file(path)?,
        });
        Ok(())
    }

    /// Serializes with a stable key order and sorted artifact list.
    pub fn to_json(&self) -> Result<String> {
        let mut sorted = self.clone();
        sorted.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        serde_json::to_string_pretty(&sorted)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Config(format!("manifest serialization failed: {e}")))
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_json()?).map_err(crate::error::io_err(&path))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(crate::error::io_err(path))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad manifest {path:?}: {e}")))
    }

    /// Verifies that every listed artifact exists under `dir` with the
    /// recorded hash; returns the mismatched paths.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut mismatches = Vec::new();
        for artifact in &self.artifacts {
            let path = dir.join(&artifact.path);
            if !path.is_file() {
                mismatches.push(format!("{} (missing)", artifact.path));
                continue;
            }
            if hash_file(&path)? != artifact.sha256 {
                mismatches.push(format!("{} (hash mismatch)", artifact.path));
            }
        }
        Ok(mismatches)
    }
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_string(&hasher.finalize())
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(crate::error::io_err(path))?;
    Ok(hash_bytes(&bytes))
}

fn hex_string(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            hash_bytes(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_round_trip_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        let artifact = dir.path().join("report.txt");
        std::fs::write(&artifact, "hello").unwrap();

        let mut manifest = RunManifest::new(PipelineConfig::default());
        manifest.record(dir.path(), &artifact).unwrap();
        let path = manifest.write(dir.path()).unwrap();

        let back = RunManifest::load(&path).unwrap();
        assert_eq!(back.artifacts.len(), 1);
        assert_eq!(back.artifacts[0].path, "report.txt");
        assert!(back.verify(dir.path()).unwrap().is_empty());

        std::fs::write(&artifact, "tampered").unwrap();
        assert_eq!(back.verify(dir.path()).unwrap().len(), 1);
    }
}
