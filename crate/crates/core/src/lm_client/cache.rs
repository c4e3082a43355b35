use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::LmError;

/// Content-addressed response store. Entries live in memory and, when a
/// directory is configured, as one file per key under it. Concurrent
/// requests for the same key wait on a per-key lock, so only the first
/// reaches the backend.
#[derive(Debug, Default)]
pub struct ResponseCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, Vec<u8>>>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Result<Self, LmError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| LmError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: Some(dir), ..Self::default() })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(&key[..2]).join(key))
    }

    pub fn get(&self, key: &str) -> Option<Vec<u8>> {
        if let Some(hit) = self.memory.lock().unwrap().get(key) {
            return Some(hit.clone());
        }
        let bytes = fs::read(self.path(key)?).ok()?;
        self.memory.lock().unwrap().insert(key.to_string(), bytes.clone());
        Some(bytes)
    }

    fn put(&self, key: &str, bytes: &[u8]) -> Result<(), LmError> {
        if let Some(path) = self.path(key) {
            let io = |e: std::io::Error| LmError::Cache(format!("{}: {e}", path.display()));
            fs::create_dir_all(path.parent().expect("cache paths have a parent")).map_err(io)?;
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            fs::write(&tmp, bytes).map_err(io)?;
            fs::rename(&tmp, &path).map_err(io)?;
        }
        self.memory.lock().unwrap().insert(key.to_string(), bytes.to_vec());
        Ok(())
    }

    /// Returns the cached bytes for `key`, computing and storing them on a
    /// miss. The flag is true on a hit. Errors are never cached.
    pub fn get_or_insert_with(
        &self,
        key: &str,
        compute: impl FnOnce() -> Result<Vec<u8>, LmError>,
    ) -> Result<(Vec<u8>, bool), LmError> {
        let lock = self.locks.lock().unwrap().entry(key.to_string()).or_default().clone();
        let _held = lock.lock().unwrap();
        if let Some(hit) = self.get(key) {
            return Ok((hit, true));
        }
        let bytes = compute()?;
        self.put(key, &bytes)?;
        Ok((bytes, false))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;

    #[test]
    fn disk_entries_survive_a_new_instance() {
        let dir = tempfile::tempdir().unwrap();
        let key = "ab".repeat(32);
        let first = ResponseCache::on_disk(dir.path()).unwrap();
        first.get_or_insert_with(&key, || Ok(b"payload".to_vec())).unwrap();
        let second = ResponseCache::on_disk(dir.path()).unwrap();
        let (bytes, hit) = second.get_or_insert_with(&key, || panic!("must not recompute")).unwrap();
        assert_eq!((bytes.as_slice(), hit), (&b"payload"[..], true));
    }

    #[test]
    fn concurrent_identical_requests_compute_once() {
        let cache = ResponseCache::in_memory();
        let calls = AtomicUsize::new(0);
        let key = "cd".repeat(32);
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    cache
                        .get_or_insert_with(&key, || {
                            calls.fetch_add(1, Ordering::SeqCst);
                            std::thread::sleep(std::time::Duration::from_millis(20));
                            Ok(b"x".to_vec())
                        })
                        .unwrap()
                });
            }
        });
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn errors_are_not_cached() {
        let cache = ResponseCache::in_memory();
        let key = "ef".repeat(32);
        assert!(cache.get_or_insert_with(&key, || Err(LmError::Backend("down".into()))).is_err());
        assert_eq!(cache.get_or_insert_with(&key, || Ok(vec![1])).unwrap(), (vec![1], false));
    }
}
