use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{cost, is_correct, roc_auc, CostModel};
use super::{EvalError, Instance};
use crate::backend::TokenUsage;
use crate::editor::{Method, PipelineTrace};
use crate::prompting::Task;

/// Where a row's confidence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceSource {
    /// Winning group weight divided by the number of paths.
    ConsistencyWeight,
    /// exp(mean token logprob) of the re-answer completion.
    ReanswerLogprob,
    /// exp(mean token logprob) of the single greedy completion.
    CompletionLogprob,
    /// Failed instance.
    None,
}

/// One evaluated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub id: String,
    pub predicted: String,
    pub gold: String,
    pub correct: bool,
    pub confidence: f64,
    pub confidence_source: ConfidenceSource,
    pub edited: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighted_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub majority_score: Option<usize>,
    pub n: usize,
    pub usage: TokenUsage,
    pub cost_usd: f64,
    #[serde(default)]
    pub failed: bool,
}

/// Metrics over a set of rows; always recomputable with [`aggregate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub instances: usize,
    pub failed: usize,
    /// EM for QA tasks, label accuracy for Fever; failed rows count as wrong.
    pub em_or_accuracy: f64,
    /// Over non-failed rows; `None` when only one class is present.
    pub auc: Option<f64>,
    pub edit_fraction: f64,
    pub total_cost_usd: f64,
    pub usage: TokenUsage,
}

/// Name of the headline metric for `task`.
pub fn metric_name(task: Task) -> &'static str {
    if task.is_classification() {
        "accuracy"
    } else {
        "em"
    }
}

fn greedy_confidence(trace: &PipelineTrace) -> Option<f64> {
    let path = trace.samples.paths.first()?;
    let total = path.total_logprob?;
    (path.token_count > 0).then(|| (total / path.token_count as f64).exp())
}

/// Turns a trace into a result row.
///
/// Confidence: greedy methods use the completion's mean token probability
/// (falling back to the consistency weight when logprobs are missing);
/// sampled methods use `weighted_score / n`, except that edited instances
/// use the re-answer's mean token probability when it is available.
pub fn score_trace(trace: &PipelineTrace, instance: &Instance, method: Method, cost_model: &CostModel) -> EvalResult {
    let usage = trace.usage;
    let cost_usd = cost(usage, cost_model);
    let Some(report) = trace.report.as_ref().filter(|_| !trace.is_failed()) else {
        return EvalResult {
            id: instance.id.clone(),
            predicted: String::new(),
            gold: instance.gold.clone(),
            correct: false,
            confidence: 0.0,
            confidence_source: ConfidenceSource::None,
            edited: false,
            weighted_score: None,
            majority_score: None,
            n: 0,
            usage,
            cost_usd,
            failed: true,
        };
    };
    let consistency = report.weighted_score / report.n as f64;
    let reanswer = trace
        .reanswer
        .as_ref()
        .filter(|_| trace.edited)
        .and_then(|r| r.mean_logprob)
        .map(f64::exp);
    let (confidence, confidence_source) = match method {
        Method::Standard | Method::Cot => match greedy_confidence(trace) {
            Some(c) => (c, ConfidenceSource::CompletionLogprob),
            None => (consistency, ConfidenceSource::ConsistencyWeight),
        },
        Method::CotSc | Method::VerifyEdit => match reanswer {
            Some(c) => (c, ConfidenceSource::ReanswerLogprob),
            None => (consistency, ConfidenceSource::ConsistencyWeight),
        },
    };
    EvalResult {
        id: instance.id.clone(),
        predicted: trace.final_answer.clone(),
        gold: instance.gold.clone(),
        correct: is_correct(instance.task, &trace.final_answer, &instance.gold),
        confidence,
        confidence_source,
        edited: trace.edited,
        weighted_score: Some(report.weighted_score),
        majority_score: Some(report.majority_score),
        n: report.n,
        usage,
        cost_usd,
        failed: false,
    }
}

/// Scores traces against the instances they were produced from, pairing by
/// position.
pub fn score_traces(
    traces: &[PipelineTrace],
    instances: &[Instance],
    method: Method,
    cost_model: &CostModel,
) -> Result<Vec<EvalResult>, EvalError> {
    if traces.len() != instances.len() {
        return Err(EvalError::LengthMismatch {
            left: traces.len(),
            right: instances.len(),
        });
    }
    traces
        .iter()
        .zip(instances)
        .map(|(t, i)| {
            if t.id != i.id {
                return Err(EvalError::Config(format!(
                    "trace {} does not match instance {}",
                    t.id, i.id
                )));
            }
            Ok(score_trace(t, i, method, cost_model))
        })
        .collect()
}

pub fn aggregate(rows: &[EvalResult]) -> Aggregates {
    let instances = rows.len();
    let frac = |count: usize| {
        if instances == 0 {
            0.0
        } else {
            count as f64 / instances as f64
        }
    };
    let scored: Vec<&EvalResult> = rows.iter().filter(|r| !r.failed).collect();
    let confidences: Vec<f64> = scored.iter().map(|r| r.confidence).collect();
    let correct: Vec<bool> = scored.iter().map(|r| r.correct).collect();
    Aggregates {
        instances,
        failed: instances - scored.len(),
        em_or_accuracy: frac(rows.iter().filter(|r| r.correct).count()),
        auc: roc_auc(&confidences, &correct).ok(),
        edit_fraction: frac(rows.iter().filter(|r| r.edited).count()),
        total_cost_usd: rows.iter().map(|r| r.cost_usd).sum(),
        usage: rows.iter().map(|r| r.usage).sum(),
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(mut out: impl Write, items: &[T]) -> Result<(), EvalError> {
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| EvalError::Config(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| EvalError::Io {
            path: "<output>".into(),
            reason: e.to_string(),
        })?;
    }
    Ok(())
}

/// Reads a JSON-lines file written by [`write_jsonl`].
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, EvalError> {
    let file = std::fs::File::open(path).map_err(|e| EvalError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EvalError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| EvalError::Schema {
            row: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}
