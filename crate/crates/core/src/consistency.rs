//! Self-consistency scoring and the edit gate.
//!
//! Sampled answers are grouped after [`normalize_answer`]. Each group gets a
//! count and a probability weight: the group's share of the summed path
//! probabilities `exp(total_logprob)`, scaled by `n` so the weight lives on
//! the same `[0, n]` scale as a majority count. When any path lacks
//! logprobs the weights fall back to counts. An instance is sent to editing
//! when the winning weight is below the threshold, by default `ceil(n / 2)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::prompting::Rationale;

/// Relative tolerance under which two group weights count as tied.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConsistencyError {
    #[error("cannot score an empty sample set")]
    EmptySampleSet,
}

/// One sampled chain of thought.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningPath {
    /// Raw completion text.
    pub text: String,
    pub rationale: Rationale,
    /// Sequence log-probability; `None` when the endpoint gave no logprobs.
    pub total_logprob: Option<f64>,
    #[serde(default)]
    pub token_count: usize,
}

impl ReasoningPath {
    pub fn answer(&self) -> &str {
        &self.rationale.answer
    }
}

/// Parsed samples for one instance; unparseable completions are dropped
/// before construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleSet {
    pub paths: Vec<ReasoningPath>,
}

impl SampleSet {
    pub fn new(paths: Vec<ReasoningPath>) -> Self {
        Self { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerGroup {
    pub count: usize,
    pub weight: f64,
    /// Indices into the sample set.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub groups: BTreeMap<String, AnswerGroup>,
    /// Answer of the representative path of the winning group.
    pub top_answer: String,
    pub top_path: usize,
    pub majority_score: usize,
    pub weighted_score: f64,
    pub n: usize,
    /// Whether the weights came from logprobs (false: count fallback).
    pub probability_weighted: bool,
}

impl ConsistencyReport {
    /// The default gate threshold, `ceil(n / 2)`.
    pub fn majority_threshold(&self) -> f64 {
        majority_threshold(self.n)
    }

    pub fn normalized_top(&self) -> String {
        normalize_answer(&self.top_answer)
    }
}

pub fn majority_threshold(n: usize) -> f64 {
    n.div_ceil(2) as f64
}

/// Lowercases, trims whitespace and terminal punctuation, collapses inner
/// whitespace and drops a leading article.
pub fn normalize_answer(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let trimmed = lowered
        .trim()
        .trim_end_matches(|c: char| matches!(c, '.' | '!' | '?' | ',' | ';' | ':') || c.is_whitespace())
        .trim();
    let mut words: Vec<&str> = trimmed.split_whitespace().collect();
    if words.len() > 1 && matches!(words[0], "a" | "an" | "the") {
        words.remove(0);
    }
    words.join(" ")
}

/// Groups answers with `normalizer` and picks the most consistent one.
///
/// The winning group maximizes weight, then count, then the lexicographically
/// smaller normalized answer. Its representative path is the member with the
/// highest `total_logprob` (first index on ties).
pub fn score(samples: &SampleSet, normalizer: impl Fn(&str) -> String) -> Result<ConsistencyReport, ConsistencyError> {
    let n = samples.len();
    if n == 0 {
        return Err(ConsistencyError::EmptySampleSet);
    }

    let logprobs: Option<Vec<f64>> = samples
        .paths
        .iter()
        .map(|p| p.total_logprob.filter(|lp| lp.is_finite()))
        .collect();
    // Relative probabilities; subtracting the max keeps exp() in range and
    // cancels in the ratio.
    let probs: Vec<f64> = match &logprobs {
        Some(lps) => {
            let max = lps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            lps.iter().map(|lp| (lp - max).exp()).collect()
        }
        None => vec![1.0; n],
    };
    // Summed in index order, like each group's members, so a unanimous
    // group gets exactly n.
    let total: f64 = probs.iter().sum();

    let mut groups: BTreeMap<String, AnswerGroup> = BTreeMap::new();
    for (i, path) in samples.paths.iter().enumerate() {
        let g = groups.entry(normalizer(path.answer())).or_insert(AnswerGroup {
            count: 0,
            weight: 0.0,
            members: Vec::new(),
        });
        g.count += 1;
        g.members.push(i);
        g.weight += probs[i];
    }
    for g in groups.values_mut() {
        g.weight = if logprobs.is_some() {
            n as f64 * (g.weight / total)
        } else {
            g.count as f64
        };
    }

    // BTreeMap iterates in lexicographic order, so keeping the first of any
    // tie implements the final tie-break.
    let mut best: Option<(&String, &AnswerGroup)> = None;
    for (answer, group) in &groups {
        best = match best {
            None => Some((answer, group)),
            Some((_, b)) => {
                let tol = TIE_EPS * b.weight.abs().max(group.weight.abs()).max(1.0);
                let better =
                    group.weight > b.weight + tol || ((group.weight - b.weight).abs() <= tol && group.count > b.count);
                if better {
                    Some((answer, group))
                } else {
                    best
                }
            }
        };
    }
    let (_, top) = best.expect("at least one group");

    let top_path = top
        .members
        .iter()
        .copied()
        .fold(None::<usize>, |acc, i| match acc {
            None => Some(i),
            Some(j) => {
                let lp_i = samples.paths[i].total_logprob.unwrap_or(f64::NEG_INFINITY);
                let lp_j = samples.paths[j].total_logprob.unwrap_or(f64::NEG_INFINITY);
                if lp_i > lp_j {
                    Some(i)
                } else {
                    Some(j)
                }
            }
        })
        .expect("non-empty group");

    Ok(ConsistencyReport {
        top_answer: samples.paths[top_path].answer().to_string(),
        top_path,
        majority_score: top.count,
        weighted_score: top.weight,
        n,
        probability_weighted: logprobs.is_some(),
        groups,
    })
}

/// Gate at the default `ceil(n / 2)` threshold.
pub fn should_edit(report: &ConsistencyReport) -> bool {
    should_edit_at(report, report.majority_threshold())
}

/// True iff the winning weighted score falls strictly below `threshold`.
pub fn should_edit_at(report: &ConsistencyReport, threshold: f64) -> bool {
    report.weighted_score < threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(answer: &str, lp: Option<f64>) -> ReasoningPath {
        ReasoningPath {
            text: format!("The answer is {answer}."),
            rationale: Rationale {
                sentences: vec![],
                answer_sentence: format!("The answer is {answer}."),
                answer: answer.to_string(),
            },
            total_logprob: lp,
            token_count: 3,
        }
    }

    fn set(answers: &[&str], lps: Option<&[f64]>) -> SampleSet {
        SampleSet::new(
            answers
                .iter()
                .enumerate()
                .map(|(i, a)| path(a, lps.map(|l| l[i])))
                .collect(),
        )
    }

    #[test]
    fn count_fallback() {
        let r = score(&set(&["A", "A", "A", "B", "C"], None), normalize_answer).unwrap();
        assert_eq!(r.groups["a"].count, 3);
        assert_eq!(r.groups["b"].count, 1);
        assert_eq!(r.groups["c"].count, 1);
        assert_eq!(r.weighted_score, 3.0);
        assert_eq!(r.top_answer, "A");
        assert!(!r.probability_weighted);
        assert!(!should_edit(&r));
    }

    #[test]
    fn probability_weights() {
        let r = score(&set(&["A", "B"], Some(&[0.3f64.ln(), 0.1f64.ln()])), normalize_answer).unwrap();
        assert!((r.groups["a"].weight - 1.5).abs() < 1e-12);
        assert!((r.groups["b"].weight - 0.5).abs() < 1e-12);
        assert_eq!(r.top_answer, "A");
    }

    #[test]
    fn unanimous_weight_is_exactly_n() {
        let lps = [-0.3, -7.1, -2.2, -0.9, -13.4];
        let r = score(&set(&["x"; 5], Some(&lps)), normalize_answer).unwrap();
        assert_eq!(r.weighted_score, 5.0);
        assert!(!should_edit_at(&r, 5.0));
    }

    #[test]
    fn single_path() {
        let r = score(&set(&["A"], Some(&[-3.0])), normalize_answer).unwrap();
        assert_eq!(r.weighted_score, 1.0);
        assert_eq!(r.n, 1);
        assert_eq!(r.top_answer, "A");
    }

    #[test]
    fn mixed_logprob_presence_falls_back() {
        let mut s = set(&["A", "B", "B"], Some(&[-0.1, -5.0, -5.0]));
        s.paths[0].total_logprob = None;
        let r = score(&s, normalize_answer).unwrap();
        assert_eq!(r.top_answer, "B");
        assert_eq!(r.weighted_score, 2.0);
    }

    #[test]
    fn empty_set() {
        assert_eq!(
            score(&SampleSet::default(), normalize_answer),
            Err(ConsistencyError::EmptySampleSet)
        );
    }

    #[test]
    fn tie_breaks() {
        // Equal counts, no logprobs: lexicographically smaller answer wins.
        let r = score(&set(&["beta", "alpha"], None), normalize_answer).unwrap();
        assert_eq!(r.top_answer, "alpha");
        // Equal weights, higher count wins.
        let r = score(
            &set(&["x", "y", "y"], Some(&[0.5f64.ln(), 0.25f64.ln(), 0.25f64.ln()])),
            normalize_answer,
        )
        .unwrap();
        assert_eq!(r.top_answer, "y");
    }

    #[test]
    fn representative_path_is_most_probable_member() {
        let r = score(
            &set(&["A", "b", "a", "a."], Some(&[-2.0, -4.0, -1.0, -3.0])),
            normalize_answer,
        )
        .unwrap();
        assert_eq!(r.groups["a"].members, vec![0, 2, 3]);
        assert_eq!(r.top_path, 2);
        assert_eq!(r.top_answer, "a");
    }

    #[test]
    fn gate_table() {
        let mut r = score(&set(&["A", "A", "A", "B", "C"], None), normalize_answer).unwrap();
        assert_eq!(r.majority_threshold(), 3.0);
        for (s, edit) in [(2.4, true), (2.99, true), (3.0, false), (5.0, false)] {
            r.weighted_score = s;
            assert_eq!(should_edit(&r), edit, "score {s}");
        }
        assert_eq!(majority_threshold(4), 2.0);
        assert_eq!(majority_threshold(1), 1.0);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_answer("Düsseldorf."), "düsseldorf");
        assert_eq!(
            normalize_answer("John Felix Anthony Cena"),
            normalize_answer("john felix anthony cena.")
        );
        assert_eq!(normalize_answer("146,606"), "146,606");
        assert_eq!(normalize_answer("  The   Beatles "), "beatles");
        assert_eq!(normalize_answer("An apple"), "apple");
        assert_eq!(normalize_answer("The"), "the");
        assert_eq!(normalize_answer(""), "");
    }
}
