//! Deterministic in-process provider for tests and offline runs.
//!
//! Never touches the network. Records every request it serves so tests can
//! assert on prompts, token budgets and sample counts.

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{cut_at_stops, CompletionBatch, CompletionProvider, CompletionRequest};
use crate::error::{Error, Result};

/// What the mock answers with.
///
/// Serializable so experiment configs can declare a mock provider and so
/// report echoes stay deterministic (hence the ordered map).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "behavior", rename_all = "snake_case")]
pub enum MockBehavior {
    /// Exact prompt -> completions lookup; unknown prompts are an error.
    Canned { map: BTreeMap<String, Vec<String>> },
    /// Continue the prompt by cycling its last `period` comma-delimited
    /// pieces, emitting roughly `max_tokens` whitespace tokens.
    RepeatLastPeriod { period: usize },
    /// The same completions for every prompt.
    Fixed { texts: Vec<String> },
}

impl MockBehavior {
    fn label(&self) -> &'static str {
        match self {
            MockBehavior::Canned { .. } => "canned",
            MockBehavior::RepeatLastPeriod { .. } => "repeat-last-period",
            MockBehavior::Fixed { .. } => "fixed",
        }
    }
}

pub struct MockProvider {
    behavior: MockBehavior,
    requests: Mutex<Vec<CompletionRequest>>,
}

impl MockProvider {
    pub fn new(behavior: MockBehavior) -> Self {
        Self {
            behavior,
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn canned(map: impl IntoIterator<Item = (String, Vec<String>)>) -> Self {
        Self::new(MockBehavior::Canned {
            map: map.into_iter().collect(),
        })
    }

    pub fn repeat_last_period(period: usize) -> Self {
        Self::new(MockBehavior::RepeatLastPeriod { period })
    }

    pub fn fixed(texts: Vec<String>) -> Self {
        Self::new(MockBehavior::Fixed { texts })
    }

    /// Every request served so far, in order.
    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.requests.lock().expect("mock request log poisoned").clone()
    }
}

/// Continue a digit-token prompt periodically. The prompt is split on
/// commas, empty trailing pieces (from the prompt's continuation cue) are
/// dropped, and the last `period` pieces are cycled starting with the one
/// `period` positions from the end — i.e. the next value of the cycle.
fn periodic_continuation(prompt: &str, period: usize, max_tokens: usize) -> String {
    let pieces: Vec<&str> = prompt
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect();
    if pieces.is_empty() || period == 0 {
        return String::new();
    }
    let cycle = &pieces[pieces.len().saturating_sub(period)..];
    let mut parts: Vec<&str> = Vec::new();
    let mut tokens = 0usize;
    let mut i = 0usize;
    while tokens < max_tokens {
        let piece = cycle[i % cycle.len()];
        // One comma token joins each piece to the stream.
        tokens += piece.split_whitespace().count() + 1;
        parts.push(piece);
        i += 1;
    }
    format!(" {} ,", parts.join(" , "))
}

impl CompletionProvider for MockProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionBatch> {
        request.validate()?;
        self.requests
            .lock()
            .expect("mock request log poisoned")
            .push(request.clone());

        let base: Vec<String> = match &self.behavior {
            MockBehavior::Canned { map } => map
                .get(&request.prompt)
                .ok_or_else(|| {
                    Error::Protocol(format!(
                        "mock has no canned completion for a prompt of {} chars",
                        request.prompt.len()
                    ))
                })?
                .clone(),
            MockBehavior::RepeatLastPeriod { period } => {
                vec![periodic_continuation(
                    &request.prompt,
                    *period,
                    request.max_tokens,
                )]
            }
            MockBehavior::Fixed { texts } => texts.clone(),
        };
        if base.is_empty() {
            return Err(Error::Protocol("mock configured with zero completions".into()));
        }

        let texts: Vec<String> = (0..request.num_samples)
            .map(|i| cut_at_stops(&base[i % base.len()], &request.stop_sequences))
            .collect();
        Ok(CompletionBatch {
            texts,
            logprob_sums: None,
            provider_id: self.id(),
            cached: false,
        })
    }

    fn id(&self) -> String {
        format!("mock:{}", self.behavior.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn request(prompt: &str, max_tokens: usize, num_samples: usize) -> CompletionRequest {
        CompletionRequest {
            model_name: "mock".into(),
            prompt: prompt.into(),
            max_tokens,
            temperature: 0.0,
            num_samples,
            stop_sequences: vec![],
            want_logprobs: false,
        }
    }

    #[test]
    fn repeat_last_period_continues_the_cycle() {
        let mock = MockProvider::repeat_last_period(3);
        let batch = mock.complete(&request("1 , 2 , 3 , 1 , 2 , 3 ,", 12, 1)).unwrap();
        assert!(
            batch.texts[0].starts_with(" 1 , 2 , 3 , 1"),
            "continuation {:?}",
            batch.texts[0]
        );
        assert!(!batch.cached);
        assert_eq!(batch.provider_id, "mock:repeat-last-period");
    }

    #[test]
    fn repeat_last_period_respects_phase() {
        // Train ends mid-cycle: ... 1 , 2 — the continuation must begin at 3.
        let mock = MockProvider::repeat_last_period(4);
        let batch = mock.complete(&request("3 , 4 , 1 , 2 ,", 10, 1)).unwrap();
        assert!(
            batch.texts[0].starts_with(" 3 , 4 , 1 , 2"),
            "continuation {:?}",
            batch.texts[0]
        );
    }

    #[test]
    fn repeat_emits_enough_tokens() {
        let mock = MockProvider::repeat_last_period(2);
        let batch = mock.complete(&request("7 7 , 8 8 ,", 30, 1)).unwrap();
        assert!(batch.texts[0].split_whitespace().count() >= 30);
    }

    #[test]
    fn canned_lookup_and_cycling() {
        let mut map = HashMap::new();
        map.insert("promptX".to_string(), vec!["a".to_string(), "b".to_string()]);
        let mock = MockProvider::canned(map);

        let batch = mock.complete(&request("promptX", 5, 2)).unwrap();
        assert_eq!(batch.texts, vec!["a", "b"]);

        // More samples than canned texts cycle deterministically.
        let batch = mock.complete(&request("promptX", 5, 3)).unwrap();
        assert_eq!(batch.texts, vec!["a", "b", "a"]);

        assert!(mock.complete(&request("unknown", 5, 1)).is_err());
    }

    #[test]
    fn fixed_applies_stop_sequences() {
        let mock = MockProvider::fixed(vec!["1 2 STOP 3 4".to_string()]);
        let mut req = request("anything", 5, 1);
        req.stop_sequences = vec!["STOP".to_string()];
        let batch = mock.complete(&req).unwrap();
        assert_eq!(batch.texts, vec!["1 2 "]);
    }

    #[test]
    fn records_requests_in_order() {
        let mock = MockProvider::fixed(vec!["x".to_string()]);
        mock.complete(&request("first", 5, 1)).unwrap();
        mock.complete(&request("second", 6, 2)).unwrap();
        let log = mock.requests();
        assert_eq!(log.len(), 2);
        assert_eq!(log[0].prompt, "first");
        assert_eq!(log[1].prompt, "second");
        assert_eq!(log[1].num_samples, 2);
    }

    #[test]
    fn invalid_requests_are_rejected_before_logging() {
        let mock = MockProvider::fixed(vec!["x".to_string()]);
        assert!(mock.complete(&request("", 5, 1)).is_err());
        assert!(mock.requests().is_empty());
    }
}
