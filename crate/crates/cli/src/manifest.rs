//! Run manifest: what was written, with content digests, plus per-stage
//! timings. Written at the end of a run, and also on failure with the
//! failed stage marked so partial results stay accounted for.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::errors::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub status: String,
    pub duration_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config_digest: String,
    pub started_at: String,
    pub finished_at: String,
    pub complete: bool,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<ArtifactRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes artifacts under one output directory and records each one.
pub struct Reporter {
    out_dir: PathBuf,
    config_digest: String,
    started_at: String,
    artifacts: Vec<ArtifactRecord>,
    stages: Vec<StageRecord>,
}

impl Reporter {
    pub fn new(out_dir: &Path, config_digest: String) -> CliResult<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Reporter {
            out_dir: out_dir.to_path_buf(),
            config_digest,
            started_at: chrono::Utc::now().to_rfc3339(),
            artifacts: Vec::new(),
            stages: Vec::new(),
        })
    }

    /// Writes one file (creating subdirectories) and records its digest.
    pub fn write(&mut self, rel: &str, contents: &[u8]) -> CliResult<()> {
        let path = self.out_dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.artifacts.push(ArtifactRecord {
            path: rel.to_string(),
            sha256: sha256_hex(contents),
            bytes: contents.len(),
        });
        Ok(())
    }

    /// Runs one named stage, recording its duration and status.
    pub fn stage<T>(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut Reporter) -> CliResult<T>,
    ) -> CliResult<T> {
        let begun = Instant::now();
        let result = body(self);
        self.stages.push(StageRecord {
            name: name.to_string(),
            status: if result.is_ok() {
                "completed"
            } else {
                "failed"
            }
            .to_string(),
            duration_ms: begun.elapsed().as_millis(),
        });
        result.map_err(|e| crate::errors::CliError {
            message: format!("stage '{name}' failed: {}", e.message),
            code: e.code,
        })
    }

    /// Writes `manifest.json`. `complete = false` marks an interrupted run.
    pub fn finish(&self, complete: bool) -> CliResult<()> {
        let manifest = RunManifest {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: self.config_digest.clone(),
            started_at: self.started_at.clone(),
            finished_at: chrono::Utc::now().to_rfc3339(),
            complete,
            stages: self.stages.clone(),
            artifacts: self.artifacts.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.out_dir.join("manifest.json"), json)?;
        Ok(())
    }
}
