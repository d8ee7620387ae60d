use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub bytes: u64,
    /// SHA-256 of `blob <len>\0<content>`, as in git's SHA-256 object format.
    pub blob_sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub femkit_version: &'static str,
    pub seed: u64,
    pub started_at: u64,
    pub finished_at: u64,
    pub config: &'a RunConfig,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    hex::encode(h.finalize())
}

/// Hash records for files, recursing into directories in name order.
pub fn hash_inputs(paths: &[PathBuf]) -> Result<Vec<InputRecord>, CliError> {
    fn visit(p: &Path, out: &mut Vec<InputRecord>) -> Result<(), CliError> {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
            entries.sort();
            for e in entries {
                visit(&e, out)?;
            }
        } else if p.is_file() {
            let content = fs::read(p)?;
            out.push(InputRecord {
                path: p.display().to_string(),
                bytes: content.len() as u64,
                blob_sha256: blob_hash(&content),
            });
        }
        Ok(())
    }
    let mut out = Vec::new();
    for p in paths {
        visit(p, &mut out)?;
    }
    Ok(out)
}

pub fn write(dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::internal(e.to_string()))?;
    fs::write(dir.join(FILE), text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_matches_git_sha256_format() {
        // printf 'hello\n' | git hash-object --object-format=sha256 --stdin
        assert_eq!(
            blob_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }
}
