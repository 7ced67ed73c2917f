//! Completion providers: the sampling interface the forecaster talks to.
//!
//! Three implementations live here: a deterministic mock for tests
//! ([`mock::MockProvider`]), an HTTP client for a hosted completion API
//! ([`http::HttpProvider`]), and a record/replay wrapper
//! ([`cache::CachedProvider`]) that makes experiments against a stochastic
//! paid API reproducible and free to rerun.

pub mod cache;
pub mod http;
pub mod mock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Upper bound on completions per request.
pub const MAX_SAMPLES_PER_REQUEST: usize = 20;

/// One sampling request to a completion model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model_name: String,
    pub prompt: String,
    pub max_tokens: usize,
    pub temperature: f64,
    pub num_samples: usize,
    pub stop_sequences: Vec<String>,
    pub want_logprobs: bool,
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<()> {
        if self.prompt.is_empty() {
            return Err(Error::InvalidArgument("prompt must be nonempty".into()));
        }
        if self.max_tokens == 0 {
            return Err(Error::InvalidArgument(
                "max_tokens must be at least 1".into(),
            ));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be finite and nonnegative, got {}",
                self.temperature
            )));
        }
        if self.num_samples == 0 || self.num_samples > MAX_SAMPLES_PER_REQUEST {
            return Err(Error::InvalidArgument(format!(
                "num_samples must lie in 1..={MAX_SAMPLES_PER_REQUEST}, got {}",
                self.num_samples
            )));
        }
        Ok(())
    }
}

/// The completions returned for one request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionBatch {
    pub texts: Vec<String>,
    /// Per-sample sums of token log-probabilities, when the provider
    /// honored `want_logprobs`.
    pub logprob_sums: Option<Vec<f64>>,
    /// Which provider produced this batch, plus attempt metadata.
    pub provider_id: String,
    /// True when the batch was replayed from a cache rather than sampled.
    pub cached: bool,
}

/// Anything that can sample completions. Implementations must be shareable
/// across threads; concurrency limits are the implementation's business.
pub trait CompletionProvider: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionBatch>;
    /// Stable identifier for provenance in reports and cache files.
    fn id(&self) -> String;
}

impl<P: CompletionProvider + ?Sized> CompletionProvider for &P {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionBatch> {
        (**self).complete(request)
    }

    fn id(&self) -> String {
        (**self).id()
    }
}

impl<P: CompletionProvider + ?Sized> CompletionProvider for Box<P> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionBatch> {
        (**self).complete(request)
    }

    fn id(&self) -> String {
        (**self).id()
    }
}

/// Content hash of a request: equal requests yield equal keys, any field
/// change yields a different key. 64 lowercase hex characters.
pub fn cache_key(request: &CompletionRequest) -> String {
    let canonical =
        serde_json::to_string(request).expect("request serialization cannot fail");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut key = String::with_capacity(64);
    for byte in digest {
        key.push_str(&format!("{byte:02x}"));
    }
    key
}

/// Truncate `text` at the earliest occurrence of any stop sequence.
pub(crate) fn cut_at_stops(text: &str, stop_sequences: &[String]) -> String {
    let mut cut = text.len();
    for stop in stop_sequences {
        if stop.is_empty() {
            continue;
        }
        if let Some(idx) = text.find(stop.as_str()) {
            cut = cut.min(idx);
        }
    }
    text[..cut].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request() -> CompletionRequest {
        CompletionRequest {
            model_name: "test-model".into(),
            prompt: "1 , 2 ,".into(),
            max_tokens: 12,
            temperature: 0.7,
            num_samples: 3,
            stop_sequences: vec![],
            want_logprobs: false,
        }
    }

    #[test]
    fn validation_catches_bad_fields() {
        assert!(request().validate().is_ok());
        let mut r = request();
        r.prompt.clear();
        assert!(r.validate().is_err());
        let mut r = request();
        r.max_tokens = 0;
        assert!(r.validate().is_err());
        let mut r = request();
        r.temperature = -0.1;
        assert!(r.validate().is_err());
        let mut r = request();
        r.num_samples = MAX_SAMPLES_PER_REQUEST + 1;
        assert!(r.validate().is_err());
    }

    #[test]
    fn cache_key_is_stable_and_sensitive() {
        let a = cache_key(&request());
        let b = cache_key(&request());
        assert_eq!(a, b);

        let mut changed = request();
        changed.temperature = 0.8;
        assert_ne!(a, cache_key(&changed));

        let mut changed = request();
        changed.prompt.push('!');
        assert_ne!(a, cache_key(&changed));

        let mut changed = request();
        changed.want_logprobs = true;
        assert_ne!(a, cache_key(&changed));
    }

    #[test]
    fn cache_key_is_64_hex_chars() {
        let key = cache_key(&request());
        assert_eq!(key.len(), 64);
        assert!(key.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
    }

    #[test]
    fn stop_sequences_cut_earliest_match() {
        let stops = vec!["END".to_string(), "\n".to_string()];
        assert_eq!(cut_at_stops("1 2 3\n4 END 5", &stops), "1 2 3");
        assert_eq!(cut_at_stops("1 2 3", &stops), "1 2 3");
        assert_eq!(cut_at_stops("1 2 3", &[]), "1 2 3");
        assert_eq!(cut_at_stops("abc", &[String::new()]), "abc");
    }
}
