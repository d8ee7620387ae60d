use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::client::GenerationParams;
use super::prompt::PromptTemplate;
use super::AugmentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub value: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// Content-addressed store of raw completions, in memory and optionally on
/// disk (one JSON file per key, written atomically). Safe to share between
/// threads.
#[derive(Debug, Default)]
pub struct CompletionCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, String>>,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Hex SHA-256 over the template identity, rendered prompt and parameters.
pub fn cache_key(template: &PromptTemplate, prompt: &str, params: &GenerationParams) -> String {
    let mut h = Sha256::new();
    for part in [
        template.name.as_bytes(),
        &template.version.to_le_bytes(),
        prompt.as_bytes(),
        serde_json::to_string(params).expect("params serialize").as_bytes(),
    ] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    hex::encode(h.finalize())
}

impl CompletionCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: impl AsRef<Path>) -> Result<Self, AugmentError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(CompletionCache {
            dir: Some(dir),
            memory: Mutex::default(),
        })
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        if let Some(v) = self.memory.lock().unwrap().get(key) {
            return Some(v.clone());
        }
        let text = fs::read_to_string(self.path(key)?).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        if entry.key != key {
            return None;
        }
        self.memory.lock().unwrap().insert(key.to_string(), entry.value.clone());
        Some(entry.value)
    }

    pub fn put(&self, key: &str, value: &str) -> Result<(), AugmentError> {
        self.memory.lock().unwrap().insert(key.to_string(), value.to_string());
        if let Some(path) = self.path(key) {
            let entry = CacheEntry {
                key: key.to_string(),
                value: value.to_string(),
                timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            };
            let tmp = path.with_extension(format!(
                "tmp.{}.{}",
                std::process::id(),
                TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
            ));
            fs::write(&tmp, serde_json::to_vec(&entry).expect("entry serializes"))?;
            fs::rename(&tmp, &path)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.memory.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_depends_on_every_input() {
        let t = PromptTemplate::new("x", 1, "");
        let p = GenerationParams::new(0.0, 10);
        let k = cache_key(&t, "prompt", &p);
        assert_eq!(k.len(), 64);
        assert_ne!(k, cache_key(&PromptTemplate::new("x", 2, ""), "prompt", &p));
        assert_ne!(k, cache_key(&t, "prompt!", &p));
        assert_ne!(k, cache_key(&t, "prompt", &GenerationParams::new(0.8, 10)));
    }

    #[test]
    fn disk_entries_survive_a_new_instance() {
        let dir = tempfile::tempdir().unwrap();
        let c = CompletionCache::on_disk(dir.path()).unwrap();
        c.put("abc", "value ✓").unwrap();
        let fresh = CompletionCache::on_disk(dir.path()).unwrap();
        assert_eq!(fresh.get("abc").as_deref(), Some("value ✓"));
        assert_eq!(fresh.get("missing"), None);
        let leftovers = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().contains(".tmp."));
        assert_eq!(leftovers.count(), 0);
    }
}
