//! External knowledge: retrievers and top-k evidence sentence ranking.
//!
//! A [`Retriever`] maps a verifying question to passages. Four sources are
//! provided: Wikipedia lead extracts, BM25 over a local corpus, a generic
//! SERP-style web search adapter, and the paragraphs shipped with a dataset
//! instance. Passages are split into sentences and the `k` most similar to
//! the question are kept as evidence.

mod bm25;
mod dataset;
mod fixture;
mod rank;
mod websearch;
mod wikipedia;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bm25::{Bm25Params, OpenCorpusRetriever, DEFAULT_TOP_DOCS};
pub use dataset::DatasetRetriever;
pub use fixture::{FixtureRetriever, RecordingRetriever, RetrieverFixture};
pub use rank::{rank_sentences, tokenize, RankMethod, RankerConfig, ScoredSentence, DEFAULT_TOP_K};
pub use websearch::{WebSearchConfig, WebSearchRetriever, SEARCH_KEY_ENV};
pub use wikipedia::{WikipediaConfig, WikipediaRetriever};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Wikipedia,
    OpenCorpus,
    WebSearch,
    Dataset,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Wikipedia => "wikipedia",
            Source::OpenCorpus => "opencorpus",
            Source::WebSearch => "websearch",
            Source::Dataset => "dataset",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = RetrievalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wikipedia" | "wiki" => Ok(Source::Wikipedia),
            "opencorpus" | "drqa" => Ok(Source::OpenCorpus),
            "websearch" | "google" => Ok(Source::WebSearch),
            "dataset" => Ok(Source::Dataset),
            other => Err(RetrievalError::Config(format!("unknown retriever {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub source: Source,
    pub title: String,
    pub text: String,
    /// Position assigned by the source, 0 first.
    pub rank: usize,
}

impl Passage {
    pub fn new(source: Source, title: impl Into<String>, text: impl Into<String>, rank: usize) -> Self {
        Self {
            source,
            title: title.into(),
            text: text.into(),
            rank,
        }
    }
}

/// Passages retrieved for one verifying question plus the ranked sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSet {
    pub query: String,
    pub passages: Vec<Passage>,
    pub top_sentences: Vec<ScoredSentence>,
    pub k: usize,
}

impl EvidenceSet {
    pub fn is_empty(&self) -> bool {
        self.top_sentences.is_empty()
    }

    /// The ranked sentences joined with `separator`, best first.
    pub fn context_block(&self, separator: &str) -> String {
        self.top_sentences
            .iter()
            .map(|s| s.sentence.as_str())
            .collect::<Vec<_>>()
            .join(separator)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("retriever unavailable: {0}")]
    RetrieverUnavailable(String),
    #[error("the corpus has no documents")]
    EmptyCorpus,
    #[error("instance has no dataset paragraphs")]
    NoDatasetContext,
    #[error("embedding endpoint error: {0}")]
    EmbeddingEndpoint(String),
    #[error("no retriever fixture for query {0:?}")]
    FixtureMiss(String),
    #[error("retriever configuration: {0}")]
    Config(String),
    #[error("{path}: {reason}")]
    File { path: String, reason: String },
}

/// The knowledge function: verifying question in, passages out.
///
/// `context` carries the instance's own paragraphs; only the dataset
/// retriever reads it.
pub trait Retriever: Send + Sync {
    fn retrieve(&self, query: &str, context: &[Passage]) -> Result<Vec<Passage>, RetrievalError>;
}

impl<R: Retriever + ?Sized> Retriever for std::sync::Arc<R> {
    fn retrieve(&self, query: &str, context: &[Passage]) -> Result<Vec<Passage>, RetrievalError> {
        (**self).retrieve(query, context)
    }
}

impl<R: Retriever + ?Sized> Retriever for Box<R> {
    fn retrieve(&self, query: &str, context: &[Passage]) -> Result<Vec<Passage>, RetrievalError> {
        (**self).retrieve(query, context)
    }
}

/// Sentences of all passages in order, exact duplicates removed.
pub fn split_sentences(passages: &[Passage]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for p in passages {
        for s in crate::prompting::split_sentences(&p.text) {
            if seen.insert(s) {
                out.push(s.to_string());
            }
        }
    }
    out
}

/// Retrieves for `query`, splits and ranks the passages' sentences.
pub fn gather_evidence(
    retriever: &dyn Retriever,
    query: &str,
    context: &[Passage],
    ranker: &RankerConfig,
) -> Result<EvidenceSet, RetrievalError> {
    let passages = retriever.retrieve(query, context)?;
    let sentences = split_sentences(&passages);
    let top_sentences = rank_sentences(query, &sentences, ranker)?;
    Ok(EvidenceSet {
        query: query.to_string(),
        passages,
        top_sentences,
        k: ranker.k,
    })
}

pub(crate) fn http_agent(timeout_secs: u64) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(std::time::Duration::from_secs(timeout_secs.max(1))))
        .user_agent(concat!("vecot/", env!("CARGO_PKG_VERSION")))
        .build()
        .into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_preserves_order_and_dedups() {
        let p1 = Passage::new(Source::Dataset, "a", "One is here. Two is here. Three is here.", 0);
        let p2 = Passage::new(Source::Dataset, "b", "Two is here. Four is here.", 1);
        assert_eq!(
            split_sentences(std::slice::from_ref(&p1)),
            vec!["One is here.", "Two is here.", "Three is here."]
        );
        assert_eq!(
            split_sentences(&[p1, p2]),
            vec!["One is here.", "Two is here.", "Three is here.", "Four is here."]
        );
        assert!(split_sentences(&[]).is_empty());
    }

    #[test]
    fn evidence_provenance() {
        let passages = vec![
            Passage::new(Source::Dataset, "John Nyskohus", "John Nyskohus is an Australian former soccer player. He played for Adelaide City in the National Soccer League.", 0),
            Passage::new(Source::Dataset, "Odd", "Odd Grenland is a Norwegian football club.", 1),
        ];
        let ev = gather_evidence(
            &DatasetRetriever,
            "What team did John Nyskohus play for?",
            &passages,
            &RankerConfig::default(),
        )
        .unwrap();
        assert!(ev.top_sentences.len() <= ev.k);
        for s in &ev.top_sentences {
            assert!(ev.passages.iter().any(|p| p.text.contains(&s.sentence)));
        }
        assert!(ev.context_block("\n").lines().count() == ev.top_sentences.len());
    }

    #[test]
    fn source_names() {
        assert_eq!("drqa".parse::<Source>().unwrap(), Source::OpenCorpus);
        assert_eq!("google".parse::<Source>().unwrap(), Source::WebSearch);
        assert!("bing".parse::<Source>().is_err());
        assert_eq!(serde_json::to_string(&Source::WebSearch).unwrap(), "\"websearch\"");
    }
}
