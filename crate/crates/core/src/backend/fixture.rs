use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, Completion, CompletionRequest, TokenUsage};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureMode {
    /// Every request must have an entry.
    #[default]
    Strict,
    /// Misses go to a fallback backend, or yield empty completions.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureCompletion {
    pub text: String,
    #[serde(default)]
    pub token_logprobs: Vec<f64>,
}

impl From<&Completion> for FixtureCompletion {
    fn from(c: &Completion) -> Self {
        Self {
            text: c.text.clone(),
            token_logprobs: c.token_logprobs.clone(),
        }
    }
}

impl From<&FixtureCompletion> for Completion {
    fn from(c: &FixtureCompletion) -> Self {
        Completion::new(c.text.clone(), c.token_logprobs.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub key: String,
    /// Prompt text, kept for readability only; lookups use `key`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    pub completions: Vec<FixtureCompletion>,
    /// Usage reported for the recorded call.
    #[serde(default)]
    pub usage: TokenUsage,
}

/// Request-keyed completions, serialized as `{entries: [...], mode}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScriptedFixture {
    entries: BTreeMap<String, FixtureEntry>,
    pub mode: FixtureMode,
}

#[derive(Serialize, Deserialize)]
struct FixtureFile {
    entries: Vec<FixtureEntry>,
    #[serde(default)]
    mode: FixtureMode,
}

impl Serialize for ScriptedFixture {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FixtureFile {
            entries: self.entries.values().cloned().collect(),
            mode: self.mode,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ScriptedFixture {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = FixtureFile::deserialize(deserializer)?;
        let mut fixture = ScriptedFixture::new(file.mode);
        for entry in file.entries {
            fixture.entries.insert(entry.key.clone(), entry);
        }
        Ok(fixture)
    }
}

impl ScriptedFixture {
    pub fn new(mode: FixtureMode) -> Self {
        Self {
            entries: BTreeMap::new(),
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &FixtureEntry> {
        self.entries.values()
    }

    pub fn get(&self, request: &CompletionRequest) -> Option<&FixtureEntry> {
        self.entries.get(&request.fixture_key())
    }

    pub fn contains(&self, request: &CompletionRequest) -> bool {
        self.entries.contains_key(&request.fixture_key())
    }

    /// Adds or replaces the entry for `request`.
    pub fn insert(&mut self, request: &CompletionRequest, completions: &[Completion], usage: TokenUsage) {
        let key = request.fixture_key();
        self.entries.insert(
            key.clone(),
            FixtureEntry {
                key,
                prompt: Some(request.prompt.clone()),
                completions: completions.iter().map(FixtureCompletion::from).collect(),
                usage,
            },
        );
    }

    /// Convenience for hand-built fixtures: text-only completions.
    pub fn insert_texts<S: AsRef<str>>(&mut self, request: &CompletionRequest, texts: &[S], usage: TokenUsage) {
        let completions: Vec<Completion> = texts.iter().map(|t| Completion::text_only(t.as_ref())).collect();
        self.insert(request, &completions, usage);
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let err = |reason: String| BackendError::FixtureFile {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| err(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), BackendError> {
        let err = |reason: String| BackendError::FixtureFile {
            path: path.display().to_string(),
            reason,
        };
        let mut text = serde_json::to_string_pretty(self).map_err(|e| err(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| err(e.to_string()))
    }
}

/// Deterministic backend replaying a [`ScriptedFixture`].
pub struct ScriptedBackend {
    fixture: ScriptedFixture,
    fallback: Option<Arc<dyn Backend>>,
    calls: AtomicU64,
    prompt_tokens: AtomicU64,
    completion_tokens: AtomicU64,
}

impl ScriptedBackend {
    pub fn new(fixture: ScriptedFixture) -> Self {
        Self {
            fixture,
            fallback: None,
            calls: AtomicU64::new(0),
            prompt_tokens: AtomicU64::new(0),
            completion_tokens: AtomicU64::new(0),
        }
    }

    /// Misses are forwarded to `fallback` when the fixture is in fallback mode.
    pub fn with_fallback(mut self, fallback: Arc<dyn Backend>) -> Self {
        self.fallback = Some(fallback);
        self
    }

    pub fn fixture(&self) -> &ScriptedFixture {
        &self.fixture
    }

    /// Number of successful `complete` calls served.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// Usage handed out so far, summed over calls.
    pub fn usage_served(&self) -> TokenUsage {
        TokenUsage::new(
            self.prompt_tokens.load(Ordering::SeqCst),
            self.completion_tokens.load(Ordering::SeqCst),
        )
    }

    fn serve(&self, out: Vec<Completion>, usage: TokenUsage) -> (Vec<Completion>, TokenUsage) {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.prompt_tokens.fetch_add(usage.prompt_tokens, Ordering::SeqCst);
        self.completion_tokens
            .fetch_add(usage.completion_tokens, Ordering::SeqCst);
        (out, usage)
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<(Vec<Completion>, TokenUsage), BackendError> {
        request.validate()?;
        let key = request.fixture_key();
        match self.fixture.entries.get(&key) {
            Some(entry) if entry.completions.len() >= request.n_samples => {
                let out = entry.completions[..request.n_samples]
                    .iter()
                    .map(|fc| {
                        let mut c = Completion::from(fc);
                        c.truncate_at_stop(&request.stop_sequences);
                        c
                    })
                    .collect();
                Ok(self.serve(out, entry.usage))
            }
            _ => match self.fixture.mode {
                FixtureMode::Strict => Err(BackendError::FixtureMiss { key }),
                FixtureMode::Fallback => match &self.fallback {
                    Some(inner) => {
                        let (out, usage) = inner.complete(request)?;
                        Ok(self.serve(out, usage))
                    }
                    None => {
                        let out = vec![Completion::text_only(""); request.n_samples];
                        Ok(self.serve(out, TokenUsage::default()))
                    }
                },
            },
        }
    }
}

/// Forwards to an inner backend and captures each distinct request.
///
/// A request whose key is already in the sink is answered from the sink,
/// so a recorded session replays exactly.
pub struct RecordingBackend {
    inner: Arc<dyn Backend>,
    sink: Arc<Mutex<ScriptedFixture>>,
}

impl RecordingBackend {
    pub fn sink(&self) -> Arc<Mutex<ScriptedFixture>> {
        self.sink.clone()
    }

    /// Copy of everything recorded so far, in strict mode.
    pub fn snapshot(&self) -> ScriptedFixture {
        let mut fixture = self.sink.lock().unwrap_or_else(|e| e.into_inner()).clone();
        fixture.mode = FixtureMode::Strict;
        fixture
    }
}

pub fn record_fixture(inner: Arc<dyn Backend>, sink: Arc<Mutex<ScriptedFixture>>) -> RecordingBackend {
    RecordingBackend { inner, sink }
}

impl Backend for RecordingBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<(Vec<Completion>, TokenUsage), BackendError> {
        {
            let sink = self.sink.lock().unwrap_or_else(|e| e.into_inner());
            if let Some(entry) = sink.get(request) {
                if entry.completions.len() >= request.n_samples {
                    let out = entry.completions[..request.n_samples]
                        .iter()
                        .map(Completion::from)
                        .collect();
                    return Ok((out, entry.usage));
                }
            }
        }
        let (completions, usage) = self.inner.complete(request)?;
        let mut sink = self.sink.lock().unwrap_or_else(|e| e.into_inner());
        // Another worker may have recorded the same key meanwhile; first write wins.
        if let Some(entry) = sink.get(request) {
            let out = entry.completions[..request.n_samples.min(entry.completions.len())]
                .iter()
                .map(Completion::from)
                .collect();
            return Ok((out, entry.usage));
        }
        sink.insert(request, &completions, usage);
        Ok((completions, usage))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scripted(mode: FixtureMode) -> ScriptedBackend {
        let mut f = ScriptedFixture::new(mode);
        let req = CompletionRequest::sampled("Q: ...", 5, 0.7);
        f.insert_texts(&req, &["a", "b", "c", "d", "e"], TokenUsage::new(10, 20));
        f.insert_texts(
            &CompletionRequest::greedy("greedy"),
            &["same text\nmore"],
            TokenUsage::new(2, 3),
        );
        ScriptedBackend::new(f)
    }

    #[test]
    fn returns_exactly_n() {
        let b = scripted(FixtureMode::Strict);
        let (cs, usage) = b.complete(&CompletionRequest::sampled("Q: ...", 5, 0.7)).unwrap();
        assert_eq!(cs.len(), 5);
        assert_eq!(usage, TokenUsage::new(10, 20));
    }

    #[test]
    fn greedy_is_byte_identical() {
        let b = scripted(FixtureMode::Strict);
        let req = CompletionRequest::greedy("greedy");
        let (a, _) = b.complete(&req).unwrap();
        let (c, _) = b.complete(&req).unwrap();
        assert_eq!(a, c);
        assert_eq!(b.calls(), 2);
        assert_eq!(b.usage_served(), TokenUsage::new(4, 6));
    }

    #[test]
    fn honors_stop_sequences() {
        let b = scripted(FixtureMode::Strict);
        let (cs, _) = b
            .complete(&CompletionRequest::greedy("greedy").with_stop(["\n"]))
            .unwrap();
        assert_eq!(cs[0].text, "same text");
    }

    #[test]
    fn strict_miss() {
        let b = scripted(FixtureMode::Strict);
        let err = b.complete(&CompletionRequest::greedy("unseen")).unwrap_err();
        assert!(matches!(err, BackendError::FixtureMiss { .. }));
        // Same prompt at a different temperature is a different key.
        let err = b.complete(&CompletionRequest::sampled("greedy", 1, 0.7)).unwrap_err();
        assert!(matches!(err, BackendError::FixtureMiss { .. }));
    }

    #[test]
    fn fallback_miss() {
        let b = scripted(FixtureMode::Fallback);
        let (cs, usage) = b.complete(&CompletionRequest::sampled("unseen", 3, 0.7)).unwrap();
        assert_eq!(cs.len(), 3);
        assert!(cs.iter().all(|c| c.text.is_empty()));
        assert_eq!(usage, TokenUsage::default());

        let inner: Arc<dyn Backend> = Arc::new(scripted(FixtureMode::Strict));
        let mut f = ScriptedFixture::new(FixtureMode::Fallback);
        f.insert_texts(&CompletionRequest::greedy("local"), &["local"], TokenUsage::default());
        let b = ScriptedBackend::new(f).with_fallback(inner);
        let (cs, _) = b.complete(&CompletionRequest::greedy("greedy")).unwrap();
        assert_eq!(cs[0].text, "same text\nmore");
    }

    #[test]
    fn recording_keys_distinct_requests() {
        let inner = Arc::new(scripted(FixtureMode::Strict));
        let sink = Arc::new(Mutex::new(ScriptedFixture::default()));
        let rec = record_fixture(inner.clone(), sink.clone());
        let sampled = CompletionRequest::sampled("Q: ...", 5, 0.7);
        let greedy = CompletionRequest::greedy("greedy");
        let first = rec.complete(&sampled).unwrap();
        rec.complete(&greedy).unwrap();
        let again = rec.complete(&sampled).unwrap();
        assert_eq!(first, again);
        assert_eq!(sink.lock().unwrap().len(), 2);
        assert_eq!(inner.calls(), 2, "second identical request replays from the sink");

        // Record then replay.
        let replay = ScriptedBackend::new(rec.snapshot());
        assert_eq!(replay.complete(&sampled).unwrap(), first);
    }

    #[test]
    fn fixture_file_roundtrip() {
        let b = scripted(FixtureMode::Strict);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        b.fixture().save(&path).unwrap();
        let loaded = ScriptedFixture::load(&path).unwrap();
        assert_eq!(&loaded, b.fixture());
        let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(raw["mode"], "strict");
        assert!(raw["entries"][0]["key"].is_string());
        assert!(raw["entries"][0]["completions"][0]["text"].is_string());
    }
}
