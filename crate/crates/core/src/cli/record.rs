use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Context;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn digest_file(path: &Path) -> std::io::Result<FileDigest> {
    let bytes = std::fs::read(path)?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// One line of the run log. The run id hashes the subcommand, parameters and
/// input digests, so identical runs share an id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub timestamp: DateTime<Utc>,
    /// Short machine-readable result, also printed on stdout.
    pub summary: serde_json::Value,
}

pub(super) fn run_id(subcommand: &str, parameters: &serde_json::Value, inputs: &[FileDigest]) -> String {
    let mut h = Sha256::new();
    h.update(subcommand.as_bytes());
    h.update([0]);
    h.update(parameters.to_string().as_bytes());
    for d in inputs {
        h.update([0]);
        h.update(d.sha256.as_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Digests each distinct path once, in first-seen order.
pub(super) fn digest_all(ps: &[PathBuf]) -> std::io::Result<Vec<FileDigest>> {
    let mut seen = std::collections::BTreeSet::new();
    ps.iter().filter(|p| seen.insert(p.to_path_buf())).map(|p| digest_file(p)).collect()
}

impl RunRecord {
    pub(super) fn build(ctx: &Context, summary: serde_json::Value) -> std::io::Result<Self> {
        let inputs = digest_all(&ctx.inputs)?;
        let outputs = digest_all(&ctx.outputs)?;
        Ok(RunRecord {
            run_id: run_id(&ctx.subcommand, &ctx.identity(), &inputs),
            subcommand: ctx.subcommand.clone(),
            parameters: ctx.parameters.clone(),
            inputs,
            outputs,
            timestamp: Utc::now(),
            summary,
        })
    }

    pub fn append(&self, log: &Path) -> std::io::Result<()> {
        if let Some(dir) = log.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(log)?;
        let line = serde_json::to_string(self).map_err(std::io::Error::other)?;
        writeln!(f, "{line}")
    }

    /// Reads every record from a run log.
    pub fn read_log(log: &Path) -> std::io::Result<Vec<RunRecord>> {
        std::fs::read_to_string(log)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
            .collect()
    }
}
