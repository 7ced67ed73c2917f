//! HTTP client for a hosted completions API.
//!
//! Speaks the classic completions wire shape: POST JSON
//! `{model, prompt, max_tokens, temperature, n, stop, logprobs}` to
//! `<base_url>/completions` with a bearer token read from an environment
//! variable, parsing `choices[].text` (and `choices[].logprobs.
//! token_logprobs` when requested) out of the response.
//!
//! The transport is a trait so tests can script responses and prove, for
//! example, that a warm cache never touches the network.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{cut_at_stops, CompletionBatch, CompletionProvider, CompletionRequest};
use crate::error::{Error, Result};

/// Environment variable consulted for the bearer token by default.
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";

/// One HTTP exchange as the provider sees it.
#[derive(Debug, Clone)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
    /// Seconds from a Retry-After header, when present.
    pub retry_after: Option<f64>,
}

/// Minimal POST-a-JSON-document transport.
pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &Value)
        -> Result<TransportResponse>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpProviderConfig {
    /// API root, e.g. "https://api.openai.com/v1".
    pub base_url: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    /// Total attempts per request (first try included).
    pub max_attempts: u32,
    /// First retry delay; doubles per subsequent retry.
    pub backoff_base_ms: u64,
    /// In-flight request cap across threads sharing this provider.
    pub max_concurrency: usize,
}

impl Default for HttpProviderConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".to_string(),
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            max_attempts: 3,
            backoff_base_ms: 250,
            max_concurrency: 4,
        }
    }
}

/// Counting gate bounding concurrent requests.
struct Gate {
    available: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(permits: usize) -> Self {
        Self {
            available: Mutex::new(permits),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut available = self.available.lock().expect("gate poisoned");
        while *available == 0 {
            available = self.freed.wait(available).expect("gate poisoned");
        }
        *available -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut available = self.gate.available.lock().expect("gate poisoned");
        *available += 1;
        self.gate.freed.notify_one();
    }
}

pub struct HttpProvider<T: Transport> {
    config: HttpProviderConfig,
    transport: T,
    gate: Gate,
}

impl<T: Transport> HttpProvider<T> {
    pub fn new(config: HttpProviderConfig, transport: T) -> Result<Self> {
        if config.base_url.is_empty() {
            return Err(Error::InvalidArgument("base_url must be nonempty".into()));
        }
        if config.max_attempts == 0 {
            return Err(Error::InvalidArgument(
                "max_attempts must be at least 1".into(),
            ));
        }
        if config.max_concurrency == 0 {
            return Err(Error::InvalidArgument(
                "max_concurrency must be at least 1".into(),
            ));
        }
        let gate = Gate::new(config.max_concurrency);
        Ok(Self {
            config,
            transport,
            gate,
        })
    }

    fn endpoint(&self) -> String {
        format!("{}/completions", self.config.base_url.trim_end_matches('/'))
    }
}

fn request_body(request: &CompletionRequest) -> Value {
    json!({
        "model": request.model_name,
        "prompt": request.prompt,
        "max_tokens": request.max_tokens,
        "temperature": request.temperature,
        "n": request.num_samples,
        "stop": if request.stop_sequences.is_empty() {
            Value::Null
        } else {
            json!(request.stop_sequences)
        },
        "logprobs": if request.want_logprobs { json!(1) } else { Value::Null },
    })
}

fn parse_batch(
    body: &str,
    request: &CompletionRequest,
    provider_id: String,
) -> Result<CompletionBatch> {
    let doc: Value = serde_json::from_str(body)
        .map_err(|e| Error::Protocol(format!("response is not JSON: {e}")))?;
    let choices = doc
        .get("choices")
        .and_then(Value::as_array)
        .filter(|c| !c.is_empty())
        .ok_or_else(|| Error::Protocol("response carries no choices".into()))?;

    let mut texts = Vec::with_capacity(choices.len());
    let mut logprob_sums = Vec::with_capacity(choices.len());
    let mut all_logprobs_present = true;
    for choice in choices {
        let text = choice
            .get("text")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Protocol("choice without a text field".into()))?;
        texts.push(cut_at_stops(text, &request.stop_sequences));

        match choice
            .get("logprobs")
            .and_then(|lp| lp.get("token_logprobs"))
            .and_then(Value::as_array)
        {
            Some(tokens) => {
                let mut sum = 0.0;
                for t in tokens {
                    sum += t.as_f64().unwrap_or(0.0);
                }
                logprob_sums.push(sum);
            }
            None => all_logprobs_present = false,
        }
    }

    Ok(CompletionBatch {
        texts,
        logprob_sums: (request.want_logprobs && all_logprobs_present)
            .then_some(logprob_sums),
        provider_id,
        cached: false,
    })
}

impl<T: Transport> CompletionProvider for HttpProvider<T> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionBatch> {
        request.validate()?;
        let _permit = self.gate.acquire();

        let url = self.endpoint();
        let bearer = std::env::var(&self.config.api_key_env).ok();
        let body = request_body(request);

        let mut last_error: Option<Error> = None;
        for attempt in 1..=self.config.max_attempts {
            if attempt > 1 {
                // Exponential backoff, stretched to any server-provided
                // retry-after hint.
                let mut wait_ms =
                    self.config.backoff_base_ms.saturating_mul(1 << (attempt - 2));
                if let Some(Error::RateLimited {
                    retry_after: Some(secs),
                    ..
                }) = &last_error
                {
                    wait_ms = wait_ms.max((secs * 1000.0) as u64);
                }
                std::thread::sleep(Duration::from_millis(wait_ms));
            }

            let response = match self.transport.post_json(&url, bearer.as_deref(), &body) {
                Ok(r) => r,
                Err(e) => {
                    last_error = Some(Error::ProviderUnavailable {
                        detail: e.to_string(),
                        attempts: attempt,
                    });
                    continue;
                }
            };

            match response.status {
                200..=299 => {
                    let provider_id = format!(
                        "http:{}#attempts={attempt}",
                        self.config.base_url.trim_end_matches('/')
                    );
                    // A malformed success body is a protocol bug, not a
                    // transient; do not retry it.
                    return parse_batch(&response.body, request, provider_id);
                }
                429 => {
                    last_error = Some(Error::RateLimited {
                        detail: snippet(&response.body),
                        retry_after: response.retry_after,
                    });
                }
                500..=599 => {
                    last_error = Some(Error::ProviderUnavailable {
                        detail: format!(
                            "status {}: {}",
                            response.status,
                            snippet(&response.body)
                        ),
                        attempts: attempt,
                    });
                }
                status => {
                    // Client errors other than 429 will not improve on retry.
                    return Err(Error::ProviderUnavailable {
                        detail: format!("status {status}: {}", snippet(&response.body)),
                        attempts: attempt,
                    });
                }
            }
        }

        Err(match last_error {
            Some(Error::ProviderUnavailable { detail, .. }) => Error::ProviderUnavailable {
                detail,
                attempts: self.config.max_attempts,
            },
            Some(e) => e,
            None => Error::ProviderUnavailable {
                detail: "no attempt was made".into(),
                attempts: 0,
            },
        })
    }

    fn id(&self) -> String {
        format!("http:{}", self.config.base_url.trim_end_matches('/'))
    }
}

fn snippet(body: &str) -> String {
    const LIMIT: usize = 200;
    if body.len() <= LIMIT {
        body.to_string()
    } else {
        let cut = (0..=LIMIT).rev().find(|&i| body.is_char_boundary(i)).unwrap_or(0);
        format!("{}...", &body[..cut])
    }
}

/// Production transport over a blocking HTTP client.
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::ProviderUnavailable {
                detail: format!("could not build HTTP client: {e}"),
                attempts: 0,
            })?;
        Ok(Self { client })
    }
}

impl Transport for ReqwestTransport {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
    ) -> Result<TransportResponse> {
        let mut builder = self.client.post(url).json(body);
        if let Some(token) = bearer {
            builder = builder.bearer_auth(token);
        }
        let response = builder.send().map_err(|e| Error::ProviderUnavailable {
            detail: format!("transport: {e}"),
            attempts: 0,
        })?;
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.parse::<f64>().ok());
        let body = response.text().map_err(|e| Error::ProviderUnavailable {
            detail: format!("could not read response body: {e}"),
            attempts: 0,
        })?;
        Ok(TransportResponse {
            status,
            body,
            retry_after,
        })
    }
}
