use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::backend::TokenUsage;
use crate::consistency::normalize_answer;
use crate::prompting::Task;

/// Normalized predicted answer equals normalized gold answer.
pub fn exact_match(predicted: &str, gold: &str) -> bool {
    normalize_answer(predicted) == normalize_answer(gold)
}

/// Label comparison after trimming and uppercasing.
pub fn label_match(predicted: &str, gold: &str) -> bool {
    predicted.trim().to_uppercase() == gold.trim().to_uppercase()
}

/// Exact match for QA tasks, label match for Fever.
pub fn is_correct(task: Task, predicted: &str, gold: &str) -> bool {
    if task.is_classification() {
        label_match(predicted, gold)
    } else {
        exact_match(predicted, gold)
    }
}

/// Probability that a random correct prediction gets higher confidence than
/// a random incorrect one, ties counting one half.
pub fn roc_auc(confidences: &[f64], correct: &[bool]) -> Result<f64, EvalError> {
    if confidences.len() != correct.len() {
        return Err(EvalError::LengthMismatch {
            left: confidences.len(),
            right: correct.len(),
        });
    }
    if let Some(bad) = confidences.iter().find(|c| c.is_nan()) {
        return Err(EvalError::InvalidConfidence(*bad));
    }
    let positives = correct.iter().filter(|c| **c).count();
    let negatives = correct.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::DegenerateLabels);
    }

    let mut order: Vec<usize> = (0..confidences.len()).collect();
    order.sort_by(|&a, &b| confidences[a].total_cmp(&confidences[b]));
    // Walk tie groups in ascending confidence, counting negatives below.
    let mut favourable = 0.0;
    let mut negatives_below = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0usize, 0usize);
        while j < order.len() && confidences[order[j]] == confidences[order[i]] {
            if correct[order[j]] {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        favourable += pos as f64 * negatives_below as f64 + 0.5 * (pos * neg) as f64;
        negatives_below += neg;
        i = j;
    }
    Ok(favourable / (positives as f64 * negatives as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub usd_per_1k_tokens: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            usd_per_1k_tokens: 0.02,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.usd_per_1k_tokens.is_finite() && self.usd_per_1k_tokens >= 0.0 {
            Ok(())
        } else {
            Err(EvalError::Config(format!(
                "usd_per_1k_tokens must be a non-negative number, got {}",
                self.usd_per_1k_tokens
            )))
        }
    }
}

/// Prompt plus completion tokens, priced per thousand.
pub fn cost(usage: TokenUsage, model: &CostModel) -> f64 {
    usage.total() as f64 / 1000.0 * model.usd_per_1k_tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_examples() {
        assert_eq!(
            roc_auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap(),
            1.0
        );
        assert_eq!(
            roc_auc(&[0.9, 0.3, 0.2, 0.6], &[true, false, true, false]).unwrap(),
            0.5
        );
        assert_eq!(
            roc_auc(&[0.4; 6], &[true, false, true, false, false, true]).unwrap(),
            0.5
        );
        assert_eq!(roc_auc(&[0.1, 0.9], &[true, false]).unwrap(), 0.0);
    }

    #[test]
    fn auc_errors() {
        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[true, true]),
            Err(EvalError::DegenerateLabels)
        ));
        assert!(matches!(roc_auc(&[], &[]), Err(EvalError::DegenerateLabels)));
        assert!(matches!(
            roc_auc(&[0.1], &[true, false]),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(
            roc_auc(&[f64::NAN, 0.2], &[true, false]),
            Err(EvalError::InvalidConfidence(_))
        ));
    }

    #[test]
    fn matching_rules() {
        assert!(exact_match("Düsseldorf.", "Düsseldorf"));
        assert!(!exact_match("146,606 inhabitants", "146,606"));
        assert!(is_correct(Task::Fever, "supports", "SUPPORTS"));
        assert!(!is_correct(Task::Fever, "REFUTES", "SUPPORTS"));
    }

    #[test]
    fn pricing() {
        let m = CostModel::default();
        assert_eq!(cost(TokenUsage::default(), &m), 0.0);
        assert!((cost(TokenUsage::new(600, 400), &m) - 0.02).abs() < 1e-12);
        assert!((cost(TokenUsage::new(650, 50), &m) - 0.014).abs() < 1e-12);
        assert!(CostModel {
            usd_per_1k_tokens: -1.0
        }
        .validate()
        .is_err());
    }
}
