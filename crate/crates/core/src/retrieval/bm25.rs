use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::Deserialize;

use super::rank::tokenize;
use super::{Passage, RetrievalError, Retriever, Source};

/// Documents returned per query.
pub const DEFAULT_TOP_DOCS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct CorpusRow {
    #[serde(default)]
    #[allow(dead_code)]
    id: serde_json::Value,
    #[serde(default)]
    title: String,
    text: String,
}

#[derive(Debug, Clone)]
struct Doc {
    title: String,
    text: String,
    len: f64,
}

/// In-memory BM25 index over a local corpus, standing in for an open-domain
/// document retriever. Built once; read-only afterwards.
#[derive(Debug, Clone)]
pub struct OpenCorpusRetriever {
    docs: Vec<Doc>,
    /// term -> (doc index, term frequency)
    postings: HashMap<String, Vec<(usize, f64)>>,
    avg_len: f64,
    params: Bm25Params,
    top_docs: usize,
}

impl OpenCorpusRetriever {
    /// Indexes `(title, text)` pairs; the title is searchable along with the text.
    pub fn new<I, T, U>(docs: I) -> Self
    where
        I: IntoIterator<Item = (T, U)>,
        T: Into<String>,
        U: Into<String>,
    {
        let mut indexed = Vec::new();
        let mut postings: HashMap<String, Vec<(usize, f64)>> = HashMap::new();
        for (i, (title, text)) in docs.into_iter().enumerate() {
            let (title, text) = (title.into(), text.into());
            let tokens = tokenize(&format!("{title} {text}"));
            let mut tf: HashMap<String, f64> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_insert(0.0) += 1.0;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push((i, count));
            }
            indexed.push(Doc {
                title,
                text,
                len: tokens.len() as f64,
            });
        }
        let avg_len = if indexed.is_empty() {
            0.0
        } else {
            indexed.iter().map(|d| d.len).sum::<f64>() / indexed.len() as f64
        };
        Self {
            docs: indexed,
            postings,
            avg_len,
            params: Bm25Params::default(),
            top_docs: DEFAULT_TOP_DOCS,
        }
    }

    /// Loads a JSON-lines corpus of `{id, title, text}` rows.
    pub fn from_jsonl(path: &Path) -> Result<Self, RetrievalError> {
        let file_err = |reason: String| RetrievalError::File {
            path: path.display().to_string(),
            reason,
        };
        let file = std::fs::File::open(path).map_err(|e| file_err(e.to_string()))?;
        let mut rows = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| file_err(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: CorpusRow =
                serde_json::from_str(&line).map_err(|e| file_err(format!("line {}: {e}", lineno + 1)))?;
            rows.push((row.title, row.text));
        }
        if rows.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        Ok(Self::new(rows))
    }

    pub fn with_params(mut self, params: Bm25Params) -> Self {
        self.params = params;
        self
    }

    pub fn with_top_docs(mut self, top_docs: usize) -> Self {
        self.top_docs = top_docs.max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// `(doc index, score)` for every document sharing a term with the
    /// query, best first; ties by index. Repeated query terms count once each
    /// occurrence.
    pub fn scores(&self, query: &str) -> Vec<(usize, f64)> {
        let n = self.docs.len() as f64;
        let Bm25Params { k1, b } = self.params;
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for term in tokenize(query) {
            let Some(list) = self.postings.get(&term) else { continue };
            let df = list.len() as f64;
            let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
            for &(doc, tf) in list {
                let len_norm = 1.0 - b + b * self.docs[doc].len / self.avg_len;
                *acc.entry(doc).or_insert(0.0) += idf * tf * (k1 + 1.0) / (tf + k1 * len_norm);
            }
        }
        let mut ranked: Vec<(usize, f64)> = acc.into_iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }
}

impl Retriever for OpenCorpusRetriever {
    fn retrieve(&self, query: &str, _context: &[Passage]) -> Result<Vec<Passage>, RetrievalError> {
        if self.docs.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        Ok(self
            .scores(query)
            .into_iter()
            .take(self.top_docs)
            .enumerate()
            .map(|(rank, (doc, _))| {
                let d = &self.docs[doc];
                Passage::new(Source::OpenCorpus, d.title.clone(), d.text.clone(), rank)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> OpenCorpusRetriever {
        OpenCorpusRetriever::new([
            (
                "John Nyskohus",
                "John Nyskohus is an Australian former soccer player who played for Adelaide City.",
            ),
            ("Odd Grenland", "Odd is a Norwegian football club from Skien."),
            ("Adelaide City", "Adelaide City is a soccer club based in Adelaide."),
        ])
    }

    #[test]
    fn disjoint_query_is_empty() {
        assert!(corpus().retrieve("quantum chromodynamics", &[]).unwrap().is_empty());
    }

    #[test]
    fn finds_relevant_doc() {
        let got = corpus().retrieve("John Nyskohus team", &[]).unwrap();
        assert_eq!(got[0].title, "John Nyskohus");
        assert_eq!(got[0].rank, 0);
        assert_eq!(got[0].source, Source::OpenCorpus);
    }

    #[test]
    fn empty_corpus() {
        let empty = OpenCorpusRetriever::new(Vec::<(String, String)>::new());
        assert!(matches!(empty.retrieve("x", &[]), Err(RetrievalError::EmptyCorpus)));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(&path, "\n").unwrap();
        assert!(matches!(
            OpenCorpusRetriever::from_jsonl(&path),
            Err(RetrievalError::EmptyCorpus)
        ));
    }

    #[test]
    fn loads_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(
            &path,
            "{\"id\": 1, \"title\": \"A\", \"text\": \"alpha beta\"}\n{\"id\": \"x\", \"title\": \"B\", \"text\": \"gamma\"}\n",
        )
        .unwrap();
        let c = OpenCorpusRetriever::from_jsonl(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.retrieve("gamma", &[]).unwrap()[0].title, "B");
        std::fs::write(&path, "{\"title\": \"A\"}\n").unwrap();
        assert!(matches!(
            OpenCorpusRetriever::from_jsonl(&path),
            Err(RetrievalError::File { .. })
        ));
    }

    #[test]
    fn top_docs_cap() {
        let docs: Vec<(String, String)> = (0..10).map(|i| (format!("d{i}"), "shared word".to_string())).collect();
        let c = OpenCorpusRetriever::new(docs);
        assert_eq!(c.retrieve("shared", &[]).unwrap().len(), DEFAULT_TOP_DOCS);
        assert_eq!(c.clone().with_top_docs(2).retrieve("shared", &[]).unwrap().len(), 2);
    }
}
