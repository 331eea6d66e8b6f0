//! On-disk cache of computed payloads, keyed by a hash of the canonical
//! parameter serialization.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CACHE_VERSION: &str = "eml-cache-1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub version: String,
    pub key: String,
    pub checksum: String,
    pub payload: String,
}

fn sha_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn cache_key(kind: &str, params: &str) -> String {
    sha_hex(format!("{CACHE_VERSION}\n{kind}\n{params}").as_bytes())
}

impl CacheEntry {
    pub fn new(key: String, payload: String) -> Self {
        CacheEntry { version: CACHE_VERSION.into(), checksum: sha_hex(payload.as_bytes()), key, payload }
    }
}

/// Why a stored entry was not used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Miss {
    Absent,
    Version(String),
    Checksum,
    Unreadable(String),
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cache dir {}: {e}", dir.display())))?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn store(&self, entry: &CacheEntry) -> Result<()> {
        let text = serde_json::to_string(entry).expect("plain data");
        // write-then-rename keeps readers from seeing partial files
        let tmp = self.dir.join(format!("{}.tmp.{}", entry.key, std::process::id()));
        fs::write(&tmp, text).map_err(|e| Error::Config(format!("cache write: {e}")))?;
        fs::rename(&tmp, self.path(&entry.key)).map_err(|e| Error::Config(format!("cache write: {e}")))
    }

    pub fn load(&self, key: &str) -> std::result::Result<CacheEntry, Miss> {
        let text = match fs::read_to_string(self.path(key)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Miss::Absent),
            Err(e) => return Err(Miss::Unreadable(e.to_string())),
        };
        let entry: CacheEntry = serde_json::from_str(&text).map_err(|e| Miss::Unreadable(e.to_string()))?;
        if entry.version != CACHE_VERSION {
            return Err(Miss::Version(entry.version));
        }
        if entry.key != key || entry.checksum != sha_hex(entry.payload.as_bytes()) {
            return Err(Miss::Checksum);
        }
        Ok(entry)
    }

    /// Return the cached payload under `key`, or compute, store and return it.
    pub fn get_or_compute<F>(&self, key: &str, compute: F) -> Result<String>
    where
        F: FnOnce() -> Result<String>,
    {
        match self.load(key) {
            Ok(entry) => {
                log::info!("cache hit {key}");
                return Ok(entry.payload);
            }
            Err(Miss::Absent) => log::info!("cache miss {key}"),
            Err(Miss::Checksum) => log::warn!("cache checksum error for {key}; recomputing"),
            Err(Miss::Version(v)) => log::warn!("cache version {v} for {key}; recomputing"),
            Err(Miss::Unreadable(e)) => log::warn!("cache entry {key} unreadable ({e}); recomputing"),
        }
        let payload = compute()?;
        self.store(&CacheEntry::new(key.to_string(), payload.clone()))?;
        Ok(payload)
    }
}

/// Write-then-read.
pub fn cache_roundtrip(cache: &Cache, entry: &CacheEntry) -> std::result::Result<CacheEntry, Miss> {
    cache.store(entry).map_err(|e| Miss::Unreadable(e.to_string()))?;
    cache.load(&entry.key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let key = cache_key("qexp", "{\"a\":1}");
        let entry = CacheEntry::new(key.clone(), "{\"coeffs\":[]}".into());
        assert_eq!(cache_roundtrip(&cache, &entry).unwrap(), entry);
        let path = dir.path().join(format!("{key}.json"));
        let text = fs::read_to_string(&path).unwrap().replace("coeffs", "coeffz");
        fs::write(&path, text).unwrap();
        assert_eq!(cache.load(&key), Err(Miss::Checksum));
        let mut calls = 0;
        let v = cache.get_or_compute(&key, || {
            calls += 1;
            Ok("{\"coeffs\":[]}".into())
        });
        assert_eq!(v.unwrap(), entry.payload);
        assert_eq!(calls, 1);
        let again = cache.get_or_compute(&key, || panic!("should hit"));
        assert_eq!(again.unwrap(), entry.payload);
        let old = CacheEntry { version: "eml-cache-0".into(), ..entry.clone() };
        cache.store(&old).unwrap();
        assert_eq!(cache.load(&key), Err(Miss::Version("eml-cache-0".into())));
    }
}
