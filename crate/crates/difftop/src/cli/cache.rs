//! Content-addressed result cache: one JSON object per line in
//! `<dir>/cache.jsonl`, appended under an exclusive lock on `<dir>/cache.lock`.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub op: String,
    pub params: serde_json::Value,
    pub created_at: u64,
    pub payload: String,
}

/// Hash of the operation name, its canonical parameters and the engine version.
pub fn cache_key(op: &str, params: &serde_json::Value) -> String {
    let mut h = Sha256::new();
    h.update(op.as_bytes());
    h.update([0]);
    // serde_json sorts object keys (no preserve_order feature), so this is canonical
    h.update(params.to_string().as_bytes());
    h.update([0]);
    h.update(ENGINE_VERSION.as_bytes());
    hex::encode(h.finalize())
}

/// `--cache-dir`, else `$DIFFTOP_CACHE`, else the per-user data directory.
pub fn resolve_dir(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os("DIFFTOP_CACHE").filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(p));
    }
    if let Some(p) = std::env::var_os("XDG_DATA_HOME").filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(p).join("difftop"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".local/share/difftop"))
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: PathBuf) -> std::io::Result<Cache> {
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    fn data_path(&self) -> PathBuf {
        self.dir.join("cache.jsonl")
    }

    fn lock_file(&self) -> std::io::Result<File> {
        OpenOptions::new().create(true).truncate(false).write(true).open(self.dir.join("cache.lock"))
    }

    /// Latest entry for `key`. Malformed lines are skipped.
    pub fn get(&self, key: &str) -> std::io::Result<Option<CacheEntry>> {
        let lock = self.lock_file()?;
        lock.lock_shared()?;
        let file = match File::open(self.data_path()) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut found = None;
        for line in BufReader::new(file).lines() {
            let line = line?;
            if let Ok(e) = serde_json::from_str::<CacheEntry>(&line) {
                if e.key == key {
                    found = Some(e);
                }
            }
        }
        Ok(found)
    }

    pub fn put(&self, op: &str, params: &serde_json::Value, payload: &str) -> std::io::Result<CacheEntry> {
        let entry = CacheEntry {
            key: cache_key(op, params),
            op: op.to_string(),
            params: params.clone(),
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            payload: payload.to_string(),
        };
        let mut line = serde_json::to_string(&entry).map_err(std::io::Error::other)?;
        line.push('\n');
        let lock = self.lock_file()?;
        lock.lock()?;
        let mut f = OpenOptions::new().create(true).append(true).open(self.data_path())?;
        f.write_all(line.as_bytes())?;
        Ok(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_depends_on_params() {
        let a = cache_key("omega", &serde_json::json!({"g": 1, "n": 1}));
        let b = cache_key("omega", &serde_json::json!({"n": 1, "g": 1}));
        let c = cache_key("omega", &serde_json::json!({"g": 1, "n": 2}));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path().to_path_buf()).unwrap();
        let p = serde_json::json!({"k": 3});
        let e = cache.put("m", &p, "payload\n").unwrap();
        assert_eq!(cache.get(&e.key).unwrap().unwrap().payload, "payload\n");
        assert!(cache.get("missing").unwrap().is_none());
    }
}
