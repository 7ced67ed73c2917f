//! Record/replay wrapper around any completion provider.
//!
//! Responses are stored one JSON file per request hash under a cache
//! directory: `{key, request, response, created_at}`. A warm cache replays
//! batches byte-identically (only the `cached` flag flips), which is what
//! makes experiments against a stochastic hosted model reproducible — and
//! lets the whole test suite run without network access.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{cache_key, CompletionBatch, CompletionProvider, CompletionRequest};
use crate::error::{Error, Result};

/// On-disk schema of one cached exchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub request: CompletionRequest,
    pub response: CachedResponse,
    /// RFC 3339 UTC timestamp of the recording.
    pub created_at: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CachedResponse {
    pub texts: Vec<String>,
    pub logprob_sums: Option<Vec<f64>>,
    pub provider_id: String,
}

pub struct CachedProvider<P> {
    inner: P,
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl<P> CachedProvider<P> {
    pub fn new(inner: P, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            inner,
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn cache_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn cache_dir(&self) -> &Path {
        &self.dir
    }
}

fn read_entry(path: &Path) -> Result<CacheEntry> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| {
        Error::Schema(format!("corrupt cache file {}: {e}", path.display()))
    })
}

impl<P: CompletionProvider> CompletionProvider for CachedProvider<P> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionBatch> {
        request.validate()?;
        let key = cache_key(request);
        let path = self.cache_path(&key);

        if path.exists() {
            let entry = read_entry(&path)?;
            // Guard against tampered or miskeyed files: the stored request
            // must be the one we are answering.
            if entry.request != *request {
                return Err(Error::Schema(format!(
                    "cache file {} does not match the request that hashed to it",
                    path.display()
                )));
            }
            return Ok(CompletionBatch {
                texts: entry.response.texts,
                logprob_sums: entry.response.logprob_sums,
                provider_id: entry.response.provider_id,
                cached: true,
            });
        }

        let batch = self.inner.complete(request)?;
        let entry = CacheEntry {
            key: key.clone(),
            request: request.clone(),
            response: CachedResponse {
                texts: batch.texts.clone(),
                logprob_sums: batch.logprob_sums.clone(),
                provider_id: batch.provider_id.clone(),
            },
            created_at: chrono::Utc::now().to_rfc3339(),
        };
        let serialized = serde_json::to_string_pretty(&entry)
            .expect("cache entry serialization cannot fail");

        // Write-then-rename under a lock so concurrent recordings of the
        // same key cannot interleave into a torn file.
        let _guard = self.write_lock.lock().expect("cache write lock poisoned");
        let tmp = self.dir.join(format!("{key}.tmp"));
        std::fs::write(&tmp, serialized).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;

        Ok(batch)
    }

    fn id(&self) -> String {
        format!("cached:{}", self.inner.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::mock::MockProvider;

    /// A provider that must never be reached; proves replay needs no inner
    /// activity (the moral equivalent of a transport that fails on use).
    struct PoisonProvider;

    impl CompletionProvider for PoisonProvider {
        fn complete(&self, _request: &CompletionRequest) -> Result<CompletionBatch> {
            Err(Error::ProviderUnavailable {
                detail: "poison provider was invoked".into(),
                attempts: 0,
            })
        }

        fn id(&self) -> String {
            "poison".into()
        }
    }

    fn request() -> CompletionRequest {
        CompletionRequest {
            model_name: "mock".into(),
            prompt: "1 , 2 , 3 ,".into(),
            max_tokens: 8,
            temperature: 0.7,
            num_samples: 2,
            stop_sequences: vec![],
            want_logprobs: false,
        }
    }

    #[test]
    fn miss_then_hit_replays_identically() {
        let dir = tempfile::tempdir().unwrap();
        let provider =
            CachedProvider::new(MockProvider::fixed(vec!["a".into(), "b".into()]), dir.path())
                .unwrap();

        let first = provider.complete(&request()).unwrap();
        assert!(!first.cached);
        let second = provider.complete(&request()).unwrap();
        assert!(second.cached);

        assert_eq!(first.texts, second.texts);
        assert_eq!(first.logprob_sums, second.logprob_sums);
        assert_eq!(first.provider_id, second.provider_id);
    }

    #[test]
    fn warm_cache_never_calls_inner() {
        let dir = tempfile::tempdir().unwrap();
        // Warm the cache with a working provider...
        let warm =
            CachedProvider::new(MockProvider::fixed(vec!["x".into()]), dir.path()).unwrap();
        warm.complete(&request()).unwrap();

        // ...then replay through one that errors on any use.
        let replay = CachedProvider::new(PoisonProvider, dir.path()).unwrap();
        let batch = replay.complete(&request()).unwrap();
        assert!(batch.cached);
        assert_eq!(batch.texts, vec!["x", "x"]);

        // A different request is a miss and must surface the poison error.
        let mut other = request();
        other.temperature = 0.9;
        assert!(replay.complete(&other).is_err());
    }

    #[test]
    fn cache_file_has_documented_schema() {
        let dir = tempfile::tempdir().unwrap();
        let provider =
            CachedProvider::new(MockProvider::fixed(vec!["x".into()]), dir.path()).unwrap();
        provider.complete(&request()).unwrap();

        let key = cache_key(&request());
        let raw = std::fs::read_to_string(provider.cache_path(&key)).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert_eq!(doc["key"], serde_json::json!(key));
        assert_eq!(doc["request"]["prompt"], serde_json::json!("1 , 2 , 3 ,"));
        assert_eq!(doc["response"]["texts"], serde_json::json!(["x", "x"]));
        assert!(doc["created_at"].as_str().unwrap().contains('T'));
    }

    #[test]
    fn corrupt_cache_file_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let provider = CachedProvider::new(PoisonProvider, dir.path()).unwrap();
        let key = cache_key(&request());
        std::fs::write(provider.cache_path(&key), "{ not json").unwrap();
        assert!(matches!(
            provider.complete(&request()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn mismatched_request_in_cache_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let provider =
            CachedProvider::new(MockProvider::fixed(vec!["x".into()]), dir.path()).unwrap();
        provider.complete(&request()).unwrap();

        // Copy the recorded entry onto the key of a different request.
        let mut other = request();
        other.prompt = "9 , 9 ,".into();
        let recorded = provider.cache_path(&cache_key(&request()));
        let forged = provider.cache_path(&cache_key(&other));
        std::fs::copy(recorded, forged).unwrap();

        assert!(matches!(
            provider.complete(&other),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn id_nests_inner_provider() {
        let dir = tempfile::tempdir().unwrap();
        let provider = CachedProvider::new(PoisonProvider, dir.path()).unwrap();
        assert_eq!(provider.id(), "cached:poison");
    }
}
