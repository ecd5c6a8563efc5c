use std::io::Write;

use serde::{Deserialize, Serialize};

use super::results::{aggregate, metric_name, score_traces, Aggregates, EvalResult};
use super::{CostModel, EvalError, Instance};
use crate::consistency::should_edit_at;
use crate::editor::{Method, Pipeline, PipelineTrace};
use crate::sync::ordered_map;

/// Histogram bin width for consistency scores.
pub const DENSITY_BIN_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub correct_count: usize,
    pub incorrect_count: usize,
}

/// Counts weighted scores of correct and incorrect rows in half-open bins
/// of width 0.5 covering `[0, n]`; the last bin also takes `n` itself.
/// Failed rows carry no score and are skipped. Empty input gives no bins.
pub fn consistency_density(rows: &[EvalResult], n_samples: usize) -> Vec<DensityBin> {
    if rows.is_empty() || n_samples == 0 {
        return Vec::new();
    }
    let bins = (n_samples as f64 / DENSITY_BIN_WIDTH).ceil() as usize;
    let mut out: Vec<DensityBin> = (0..bins)
        .map(|i| DensityBin {
            bin_low: i as f64 * DENSITY_BIN_WIDTH,
            bin_high: ((i + 1) as f64 * DENSITY_BIN_WIDTH).min(n_samples as f64),
            correct_count: 0,
            incorrect_count: 0,
        })
        .collect();
    for r in rows {
        let Some(score) = r.weighted_score.filter(|s| s.is_finite()) else {
            continue;
        };
        let idx = ((score / DENSITY_BIN_WIDTH).floor().max(0.0) as usize).min(bins - 1);
        if r.correct {
            out[idx].correct_count += 1;
        } else {
            out[idx].incorrect_count += 1;
        }
    }
    out
}

fn csv_err(e: impl std::fmt::Display) -> EvalError {
    EvalError::Csv(e.to_string())
}

pub fn write_density_csv(out: impl Write, bins: &[DensityBin]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_low", "bin_high", "correct_count", "incorrect_count"])
        .map_err(csv_err)?;
    for b in bins {
        w.write_record([
            b.bin_low.to_string(),
            b.bin_high.to_string(),
            b.correct_count.to_string(),
            b.incorrect_count.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub threshold: f64,
    pub aggregates: Aggregates,
    pub results: Vec<EvalResult>,
}

/// Runs the gate at every threshold over one shared set of samples.
///
/// Each instance is sampled once. Instances gated at the largest threshold
/// are edited once; since the gate is monotone in the threshold, every
/// smaller threshold edits a subset of them and reuses those edits.
pub fn ablate_threshold(
    pipeline: &Pipeline,
    instances: &[Instance],
    thresholds: &[f64],
    parallelism: usize,
    cost_model: &CostModel,
) -> Result<Vec<AblationRow>, EvalError> {
    let n = pipeline.config().n_samples as f64;
    if let Some(bad) = thresholds.iter().find(|t| !(0.0..=n).contains(*t)) {
        return Err(EvalError::Config(format!("threshold {bad} outside [0, {n}]")));
    }
    let Some(max_t) = thresholds.iter().copied().reduce(f64::max) else {
        return Ok(Vec::new());
    };

    let sampled = ordered_map(
        instances,
        parallelism,
        |_, inst| pipeline.sample(inst, Method::VerifyEdit),
        |_, _| {},
    );
    let edits = ordered_map(
        &sampled,
        parallelism,
        |i, s| match s {
            Ok(s) if should_edit_at(&s.report, max_t) => Some(pipeline.edit(&instances[i], s)),
            _ => None,
        },
        |_, _| {},
    );

    thresholds
        .iter()
        .map(|&t| {
            let traces: Vec<PipelineTrace> = sampled
                .iter()
                .zip(&edits)
                .zip(instances)
                .map(|((s, e), inst)| match s {
                    Ok(s) => pipeline.assemble(s, e.as_ref().filter(|_| should_edit_at(&s.report, t))),
                    Err(f) => PipelineTrace::from_sampling_failure(&inst.id, f),
                })
                .collect();
            let results = score_traces(&traces, instances, Method::VerifyEdit, cost_model)?;
            Ok(AblationRow {
                threshold: t,
                aggregates: aggregate(&results),
                results,
            })
        })
        .collect()
}

/// Long-format plot data: one `(threshold, metric, value)` row per metric
/// and threshold. Undefined AUC is written as `NaN`.
pub fn write_ablation_csv(
    out: impl Write,
    rows: &[AblationRow],
    task: crate::prompting::Task,
) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "metric", "value"]).map_err(csv_err)?;
    for r in rows {
        let t = r.threshold.to_string();
        let metrics = [
            (metric_name(task), r.aggregates.em_or_accuracy),
            ("auc", r.aggregates.auc.unwrap_or(f64::NAN)),
            ("edit_fraction", r.aggregates.edit_fraction),
        ];
        for (name, value) in metrics {
            w.write_record([t.as_str(), name, &value.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(csv_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::TokenUsage;
    use crate::eval::ConfidenceSource;

    fn scored(score: Option<f64>, correct: bool) -> EvalResult {
        EvalResult {
            id: "x".into(),
            predicted: String::new(),
            gold: String::new(),
            correct,
            confidence: 0.0,
            confidence_source: ConfidenceSource::ConsistencyWeight,
            edited: false,
            weighted_score: score,
            majority_score: None,
            n: 5,
            usage: TokenUsage::default(),
            cost_usd: 0.0,
            failed: score.is_none(),
        }
    }

    #[test]
    fn hand_binned_scores() {
        let rows: Vec<EvalResult> = [0.5, 1.2, 2.9, 4.8, 5.0]
            .iter()
            .map(|s| scored(Some(*s), true))
            .collect();
        let bins = consistency_density(&rows, 5);
        assert_eq!(bins.len(), 10);
        let nonzero: Vec<(f64, f64, usize)> = bins
            .iter()
            .filter(|b| b.correct_count > 0)
            .map(|b| (b.bin_low, b.bin_high, b.correct_count))
            .collect();
        assert_eq!(
            nonzero,
            vec![(0.5, 1.0, 1), (1.0, 1.5, 1), (2.5, 3.0, 1), (4.5, 5.0, 2)]
        );
        assert!(bins.iter().all(|b| b.incorrect_count == 0));
    }

    #[test]
    fn density_edges() {
        assert!(consistency_density(&[], 5).is_empty());
        let bins = consistency_density(&[scored(None, false), scored(Some(3.0), false)], 5);
        assert_eq!(bins.iter().map(|b| b.incorrect_count).sum::<usize>(), 1);
        assert_eq!(bins[6].incorrect_count, 1);
    }

    #[test]
    fn density_csv_header() {
        let mut buf = Vec::new();
        write_density_csv(&mut buf, &consistency_density(&[scored(Some(0.0), true)], 1)).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bin_low,bin_high,correct_count,incorrect_count\n0,0.5,1,0\n0.5,1,0,0\n"
        );
    }
}
