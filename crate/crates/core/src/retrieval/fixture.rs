use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{Passage, RetrievalError, Retriever};

/// Query → passages, serialized as a plain JSON object.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RetrieverFixture {
    pub entries: BTreeMap<String, Vec<Passage>>,
}

impl RetrieverFixture {
    pub fn insert(&mut self, query: impl Into<String>, passages: Vec<Passage>) {
        self.entries.insert(query.into(), passages);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let err = |reason: String| RetrievalError::File {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| err(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), RetrievalError> {
        let err = |reason: String| RetrievalError::File {
            path: path.display().to_string(),
            reason,
        };
        let mut text = serde_json::to_string_pretty(self).map_err(|e| err(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| err(e.to_string()))
    }
}

/// Replays recorded retrieval results.
pub struct FixtureRetriever {
    fixture: RetrieverFixture,
    fallback: Option<Arc<dyn Retriever>>,
}

impl FixtureRetriever {
    /// Strict replay: unknown queries fail with `FixtureMiss`.
    pub fn new(fixture: RetrieverFixture) -> Self {
        Self {
            fixture,
            fallback: None,
        }
    }

    pub fn with_fallback(mut self, fallback: Arc<dyn Retriever>) -> Self {
        self.fallback = Some(fallback);
        self
    }
}

impl Retriever for FixtureRetriever {
    fn retrieve(&self, query: &str, context: &[Passage]) -> Result<Vec<Passage>, RetrievalError> {
        match (self.fixture.entries.get(query), &self.fallback) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(inner)) => inner.retrieve(query, context),
            (None, None) => Err(RetrievalError::FixtureMiss(query.to_string())),
        }
    }
}

/// Forwards to an inner retriever and records every distinct query.
pub struct RecordingRetriever {
    inner: Arc<dyn Retriever>,
    sink: Arc<Mutex<RetrieverFixture>>,
}

impl RecordingRetriever {
    pub fn new(inner: Arc<dyn Retriever>, sink: Arc<Mutex<RetrieverFixture>>) -> Self {
        Self { inner, sink }
    }

    pub fn snapshot(&self) -> RetrieverFixture {
        self.sink.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

impl Retriever for RecordingRetriever {
    fn retrieve(&self, query: &str, context: &[Passage]) -> Result<Vec<Passage>, RetrievalError> {
        if let Some(p) = self.sink.lock().unwrap_or_else(|e| e.into_inner()).entries.get(query) {
            return Ok(p.clone());
        }
        let passages = self.inner.retrieve(query, context)?;
        self.sink
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entries
            .entry(query.to_string())
            .or_insert_with(|| passages.clone());
        Ok(passages)
    }
}
