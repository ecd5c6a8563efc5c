//! Completion-style language model access.
//!
//! A [`Backend`] turns a [`CompletionRequest`] into `n_samples` completions
//! plus the token usage reported for that call. [`HttpBackend`] talks to an
//! OpenAI-compatible `/completions` endpoint; [`ScriptedBackend`] replays a
//! [`ScriptedFixture`]; [`RecordingBackend`] captures live traffic into one.

mod fixture;
mod http;
mod retry;

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use fixture::{
    record_fixture, FixtureCompletion, FixtureEntry, FixtureMode, RecordingBackend, ScriptedBackend, ScriptedFixture,
};
pub use http::{HttpBackend, HttpBackendConfig, API_KEY_ENV};
pub use retry::RetryPolicy;

/// Default completion budget per call.
pub const DEFAULT_MAX_TOKENS: u32 = 256;

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limit exhausted: {0}")]
    Quota(String),
    #[error("endpoint rejected request (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("no fixture entry for request key {key}")]
    FixtureMiss { key: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("missing credential: environment variable {0} is not set")]
    MissingCredential(&'static str),
    #[error("malformed endpoint response: {0}")]
    Malformed(String),
    #[error("fixture file {path}: {reason}")]
    FixtureFile { path: String, reason: String },
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_) | BackendError::Quota(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub n_samples: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop_sequences: Vec<String>,
    pub want_logprobs: bool,
}

impl CompletionRequest {
    /// Single greedy completion with logprobs requested.
    pub fn greedy(prompt: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            n_samples: 1,
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            stop_sequences: Vec::new(),
            want_logprobs: true,
        }
    }

    pub fn sampled(prompt: impl Into<String>, n_samples: usize, temperature: f64) -> Self {
        Self {
            n_samples,
            temperature,
            ..Self::greedy(prompt)
        }
    }

    pub fn with_stop<I, S>(mut self, stops: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stop_sequences = stops.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.n_samples == 0 {
            return Err(BackendError::InvalidRequest("n_samples must be >= 1".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(BackendError::InvalidRequest(format!(
                "temperature must be a finite non-negative number, got {}",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens must be >= 1".into()));
        }
        Ok(())
    }

    /// Fixture key: SHA-256 over temperature, sample count and prompt.
    ///
    /// `max_tokens` and the stop sequences are not part of the key.
    pub fn fixture_key(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("t={:.6}\u{0}n={}\u{0}", self.temperature, self.n_samples));
        hasher.update(self.prompt.as_bytes());
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    /// Natural-log probability of each generated token; empty when the
    /// endpoint did not report them.
    #[serde(default)]
    pub token_logprobs: Vec<f64>,
    #[serde(default)]
    pub total_logprob: f64,
}

impl Completion {
    pub fn new(text: impl Into<String>, token_logprobs: Vec<f64>) -> Self {
        let total_logprob = token_logprobs.iter().sum();
        Self {
            text: text.into(),
            token_logprobs,
            total_logprob,
        }
    }

    pub fn text_only(text: impl Into<String>) -> Self {
        Self::new(text, Vec::new())
    }

    pub fn has_logprobs(&self) -> bool {
        !self.token_logprobs.is_empty()
    }

    pub fn mean_logprob(&self) -> Option<f64> {
        if self.token_logprobs.is_empty() {
            None
        } else {
            Some(self.total_logprob / self.token_logprobs.len() as f64)
        }
    }

    /// Cuts the text at the earliest stop sequence, if any occurs.
    pub fn truncate_at_stop(&mut self, stops: &[String]) {
        let cut = stops
            .iter()
            .filter(|s| !s.is_empty())
            .filter_map(|s| self.text.find(s.as_str()))
            .min();
        if let Some(cut) = cut {
            self.text.truncate(cut);
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl TokenUsage {
    pub fn new(prompt_tokens: u64, completion_tokens: u64) -> Self {
        Self {
            prompt_tokens,
            completion_tokens,
        }
    }

    pub fn total(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}

impl Add for TokenUsage {
    type Output = TokenUsage;

    fn add(self, rhs: TokenUsage) -> TokenUsage {
        TokenUsage {
            prompt_tokens: self.prompt_tokens + rhs.prompt_tokens,
            completion_tokens: self.completion_tokens + rhs.completion_tokens,
        }
    }
}

impl AddAssign for TokenUsage {
    fn add_assign(&mut self, rhs: TokenUsage) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for TokenUsage {
    fn sum<I: Iterator<Item = TokenUsage>>(iter: I) -> Self {
        iter.fold(TokenUsage::default(), Add::add)
    }
}

/// A completion-style language model.
///
/// Implementations are shared across worker threads.
pub trait Backend: Send + Sync {
    /// Returns exactly `request.n_samples` completions and the usage of this
    /// call alone.
    fn complete(&self, request: &CompletionRequest) -> Result<(Vec<Completion>, TokenUsage), BackendError>;
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<(Vec<Completion>, TokenUsage), BackendError> {
        (**self).complete(request)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<(Vec<Completion>, TokenUsage), BackendError> {
        (**self).complete(request)
    }
}
