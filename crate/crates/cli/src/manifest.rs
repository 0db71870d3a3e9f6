//! Run manifests: one per emitted result file, written beside it.
//!
//! The manifest carries everything needed to reproduce and audit a run —
//! command line, parameters, seed, code version, timestamps, and digests of
//! the emitted files. Timestamps live only here; result files stay
//! byte-identical across reruns.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub version: String,
    pub seed: u64,
    pub timestamp: String,
    pub params: serde_json::Value,
    pub outputs: Vec<OutputDigest>,
}

#[derive(Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Write `<result>.manifest.json` next to the result file.
pub fn write_manifest(
    result_path: &Path,
    params: serde_json::Value,
    seed: u64,
) -> anyhow::Result<PathBuf> {
    let manifest = RunManifest {
        command_line: std::env::args().collect(),
        version: occupath_core::VERSION.into(),
        seed,
        timestamp: chrono::Utc::now().to_rfc3339(),
        params,
        outputs: vec![OutputDigest {
            path: result_path.display().to_string(),
            sha256: sha256_file(result_path)?,
        }],
    };
    let mut manifest_path = result_path.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    let manifest_path = PathBuf::from(manifest_path);
    std::fs::write(&manifest_path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest_path)
}
