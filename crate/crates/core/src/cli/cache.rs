//! Persistent result cache: one JSON file per entry under the cache
//! directory, named by the hex digest of the canonical key. Writes are
//! atomic (temp file + rename) and existing entries are never overwritten,
//! so re-computation at the same key is a pure read.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ratlab::EvalCache;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CacheKey {
    pub op: String,
    pub param: String,
    pub digits: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: CacheKey,
    /// Decimal value with exactly `key.digits` significant digits.
    pub value: String,
    /// Seconds since the Unix epoch at first write.
    pub created: u64,
    pub tool_version: String,
}

/// Splits a canonical key string `op|param|digits=N` into its parts.
fn split_key(key: &str) -> CacheKey {
    let mut op = String::new();
    let mut digits = 0usize;
    let mut params = Vec::new();
    for (i, seg) in key.split('|').enumerate() {
        if i == 0 {
            op = seg.to_string();
        } else if let Some(d) = seg.strip_prefix("digits=") {
            digits = d.parse().unwrap_or(0);
        } else {
            params.push(seg);
        }
    }
    CacheKey {
        op,
        param: params.join("|"),
        digits,
    }
}

pub struct FsCache {
    dir: PathBuf,
}

impl FsCache {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(FsCache {
            dir: dir.to_path_buf(),
        })
    }

    fn path_for(&self, key: &str) -> PathBuf {
        let digest = Sha256::digest(key.as_bytes());
        self.dir.join(format!("{:x}.json", digest))
    }

    pub fn read_entry(&self, key: &str) -> Option<CacheEntry> {
        let bytes = fs::read(self.path_for(key)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn write_entry(&self, key: &str, value: &str) -> std::io::Result<()> {
        let path = self.path_for(key);
        if path.exists() {
            return Ok(());
        }
        let entry = CacheEntry {
            key: split_key(key),
            value: value.to_string(),
            created: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec_pretty(&entry)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

impl EvalCache for FsCache {
    fn get(&self, key: &str) -> Option<String> {
        self.read_entry(key).map(|e| e.value)
    }

    fn put(&self, key: &str, value: &str) {
        if let Err(e) = self.write_entry(key, value) {
            eprintln!("warning: cache write failed for {key}: {e}");
        }
    }
}
