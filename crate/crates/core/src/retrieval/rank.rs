use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RetrievalError;

/// Evidence sentences kept per verifying question.
pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMethod {
    /// Cosine over TF-IDF unigram+bigram vectors.
    #[default]
    Lexical,
    /// Cosine over vectors from an external embedding endpoint.
    EmbeddingEndpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankerConfig {
    pub k: usize,
    pub method: RankMethod,
    /// Embedding endpoint URL (OpenAI `/embeddings` request/response shape).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl Default for RankerConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_TOP_K,
            method: RankMethod::Lexical,
            endpoint: None,
            model: None,
        }
    }
}

impl RankerConfig {
    pub fn lexical(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), RetrievalError> {
        if self.k == 0 {
            return Err(RetrievalError::Config("ranker k must be >= 1".into()));
        }
        match (self.method, &self.endpoint) {
            (RankMethod::Lexical, Some(_)) => Err(RetrievalError::Config(
                "an endpoint is only valid with the embedding_endpoint method".into(),
            )),
            (RankMethod::EmbeddingEndpoint, None) => Err(RetrievalError::Config(
                "embedding_endpoint method needs an endpoint URL".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    pub sentence: String,
    pub score: f64,
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn ngram_counts(text: &str) -> BTreeMap<String, f64> {
    let tokens = tokenize(text);
    let mut counts = BTreeMap::new();
    for t in &tokens {
        *counts.entry(t.clone()).or_insert(0.0) += 1.0;
    }
    for pair in tokens.windows(2) {
        *counts.entry(format!("{} {}", pair[0], pair[1])).or_insert(0.0) += 1.0;
    }
    counts
}

/// TF-IDF cosine of `query` against each sentence. Document frequencies are
/// taken over the query plus all sentences, with smoothed idf
/// `ln((1 + N) / (1 + df)) + 1`.
fn lexical_scores(query: &str, sentences: &[String]) -> Vec<f64> {
    let docs: Vec<BTreeMap<String, f64>> = std::iter::once(query)
        .chain(sentences.iter().map(String::as_str))
        .map(ngram_counts)
        .collect();
    let mut df: BTreeMap<&str, f64> = BTreeMap::new();
    for doc in &docs {
        for term in doc.keys() {
            *df.entry(term.as_str()).or_insert(0.0) += 1.0;
        }
    }
    let n = docs.len() as f64;
    let weigh = |doc: &BTreeMap<String, f64>| -> BTreeMap<String, f64> {
        let mut v: BTreeMap<String, f64> = doc
            .iter()
            .map(|(t, tf)| (t.clone(), tf * (((1.0 + n) / (1.0 + df[t.as_str()])).ln() + 1.0)))
            .collect();
        let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.values_mut().for_each(|x| *x /= norm);
        }
        v
    };
    let q = weigh(&docs[0]);
    docs[1..]
        .iter()
        .map(|doc| {
            let s = weigh(doc);
            let dot: f64 = q.iter().filter_map(|(t, w)| s.get(t).map(|x| w * x)).sum();
            dot.clamp(0.0, 1.0)
        })
        .collect()
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    input: &'a [&'a str],
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    #[serde(default)]
    index: Option<usize>,
    embedding: Vec<f64>,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn embedding_scores(query: &str, sentences: &[String], config: &RankerConfig) -> Result<Vec<f64>, RetrievalError> {
    let endpoint = config
        .endpoint
        .as_deref()
        .ok_or_else(|| RetrievalError::EmbeddingEndpoint("no endpoint configured".into()))?;
    let input: Vec<&str> = std::iter::once(query)
        .chain(sentences.iter().map(String::as_str))
        .collect();
    let err = |e: String| RetrievalError::EmbeddingEndpoint(e);
    let mut response = super::http_agent(60)
        .post(endpoint)
        .send_json(EmbeddingRequest {
            input: &input,
            model: config.model.as_deref(),
        })
        .map_err(|e| err(e.to_string()))?;
    let mut parsed: EmbeddingResponse = response.body_mut().read_json().map_err(|e| err(e.to_string()))?;
    if parsed.data.len() != input.len() {
        return Err(err(format!(
            "expected {} embeddings, got {}",
            input.len(),
            parsed.data.len()
        )));
    }
    if parsed.data.iter().all(|d| d.index.is_some()) {
        parsed.data.sort_by_key(|d| d.index);
    }
    let q = &parsed.data[0].embedding;
    Ok(parsed.data[1..].iter().map(|d| cosine(q, &d.embedding)).collect())
}

/// The `min(k, sentences.len())` sentences most similar to `query`, best
/// first; equal scores keep input order.
pub fn rank_sentences(
    query: &str,
    sentences: &[String],
    config: &RankerConfig,
) -> Result<Vec<ScoredSentence>, RetrievalError> {
    if sentences.is_empty() {
        return Ok(Vec::new());
    }
    let scores = match config.method {
        RankMethod::Lexical => lexical_scores(query, sentences),
        RankMethod::EmbeddingEndpoint => embedding_scores(query, sentences, config)?,
    };
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .take(config.k.max(1))
        .map(|i| ScoredSentence {
            sentence: sentences[i].clone(),
            score: scores[i],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn nyskohus_sentence_first() {
        let sentences = s(&[
            "Odd Grenland is a Norwegian football club from Skien.",
            "John Nyskohus is an Australian former soccer player who played for Adelaide City.",
            "The Bay of Bengal is the largest bay in the world.",
        ]);
        let ranked = rank_sentences(
            "What team did John Nyskohus play for?",
            &sentences,
            &RankerConfig::default(),
        )
        .unwrap();
        assert_eq!(ranked.len(), 3);
        assert_eq!(ranked[0].sentence, sentences[1]);
        assert!(ranked[0].score > ranked[1].score);
    }

    #[test]
    fn k_bounds() {
        let sentences = s(&["a b c.", "d e f."]);
        assert_eq!(
            rank_sentences("a", &sentences, &RankerConfig::lexical(3))
                .unwrap()
                .len(),
            2
        );
        assert_eq!(
            rank_sentences("a", &sentences, &RankerConfig::lexical(1))
                .unwrap()
                .len(),
            1
        );
        assert!(rank_sentences("a", &[], &RankerConfig::default()).unwrap().is_empty());
        assert_eq!(RankerConfig::default().k, 3);
    }

    #[test]
    fn ties_keep_input_order() {
        let sentences = s(&["zzz one.", "yyy two.", "xxx three."]);
        let ranked = rank_sentences("unrelated", &sentences, &RankerConfig::lexical(3)).unwrap();
        let got: Vec<&str> = ranked.iter().map(|r| r.sentence.as_str()).collect();
        assert_eq!(got, vec!["zzz one.", "yyy two.", "xxx three."]);
        assert!(ranked.iter().all(|r| r.score == 0.0));
    }

    #[test]
    fn config_validation() {
        assert!(RankerConfig::default().validate().is_ok());
        assert!(RankerConfig::lexical(0).validate().is_err());
        let bad = RankerConfig {
            method: RankMethod::EmbeddingEndpoint,
            ..RankerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RankerConfig {
            endpoint: Some("http://x".into()),
            ..RankerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn scores_bounded_and_sorted(
            query in "[a-d ]{1,20}",
            sentences in proptest::collection::vec("[a-d ]{0,20}", 0..8),
            k in 1usize..5,
        ) {
            let ranked = rank_sentences(&query, &sentences, &RankerConfig::lexical(k)).unwrap();
            prop_assert_eq!(ranked.len(), k.min(sentences.len()));
            for w in ranked.windows(2) {
                prop_assert!(w[0].score >= w[1].score);
            }
            for r in &ranked {
                prop_assert!((0.0..=1.0).contains(&r.score));
            }
        }

        /// Reordering input sentences can only reshuffle ties at the cut:
        /// the multiset of selected scores and every sentence scoring
        /// strictly above the k-th score are unchanged.
        #[test]
        fn permutation_stable(
            query in "[a-d ]{1,20}",
            sentences in proptest::collection::vec("[a-e ]{1,20}", 1..8),
            k in 1usize..4,
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = sentences.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = rank_sentences(&query, &sentences, &RankerConfig::lexical(k)).unwrap();
            let b = rank_sentences(&query, &shuffled, &RankerConfig::lexical(k)).unwrap();
            let sa: Vec<f64> = a.iter().map(|r| r.score).collect();
            let sb: Vec<f64> = b.iter().map(|r| r.score).collect();
            prop_assert_eq!(&sa, &sb);
            let cut = *sa.last().unwrap();
            for r in a.iter().filter(|r| r.score > cut) {
                prop_assert!(b.iter().any(|x| x.sentence == r.sentence));
            }
        }
    }
}
