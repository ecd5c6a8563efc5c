use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EvalError, EvalResult};

/// Draws `target / 2` correct and `target / 2` incorrect ids without
/// replacement. The selection is returned in input order. Failed rows are
/// not predictions and never drawn.
pub fn balanced_subsample(rows: &[EvalResult], target: usize, seed: u64) -> Result<Vec<String>, EvalError> {
    if !target.is_multiple_of(2) {
        return Err(EvalError::InvalidTarget(target));
    }
    let half = target / 2;
    let pool = |correct: bool| -> Vec<usize> {
        rows.iter()
            .enumerate()
            .filter(|(_, r)| !r.failed && r.correct == correct)
            .map(|(i, _)| i)
            .collect()
    };
    let (right, wrong) = (pool(true), pool(false));
    for (label, p) in [("correct", &right), ("incorrect", &wrong)] {
        if p.len() < half {
            return Err(EvalError::InsufficientPool {
                class: label,
                needed: half,
                available: p.len(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = Vec::with_capacity(target);
    for p in [&right, &wrong] {
        picked.extend(
            rand::seq::index::sample(&mut rng, p.len(), half)
                .into_iter()
                .map(|i| p[i]),
        );
    }
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| rows[i].id.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::TokenUsage;
    use crate::eval::ConfidenceSource;

    fn rows(correct: usize, incorrect: usize) -> Vec<EvalResult> {
        (0..correct + incorrect)
            .map(|i| EvalResult {
                id: format!("r{i}"),
                predicted: String::new(),
                gold: String::new(),
                correct: i < correct,
                confidence: 0.5,
                confidence_source: ConfidenceSource::ConsistencyWeight,
                edited: false,
                weighted_score: Some(2.5),
                majority_score: Some(3),
                n: 5,
                usage: TokenUsage::default(),
                cost_usd: 0.0,
                failed: false,
            })
            .collect()
    }

    #[test]
    fn exact_fit_takes_all() {
        let r = rows(2, 2);
        assert_eq!(balanced_subsample(&r, 4, 1).unwrap(), vec!["r0", "r1", "r2", "r3"]);
    }

    #[test]
    fn insufficient_and_odd() {
        assert!(matches!(
            balanced_subsample(&rows(3, 20), 10, 0),
            Err(EvalError::InsufficientPool {
                class: "correct",
                needed: 5,
                available: 3
            })
        ));
        assert!(matches!(
            balanced_subsample(&rows(3, 3), 3, 0),
            Err(EvalError::InvalidTarget(3))
        ));
    }

    #[test]
    fn seeded() {
        let r = rows(40, 60);
        let a = balanced_subsample(&r, 20, 7).unwrap();
        assert_eq!(a, balanced_subsample(&r, 20, 7).unwrap());
        assert_ne!(a, balanced_subsample(&r, 20, 8).unwrap());
        let ids: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(ids.len(), 20);
    }
}
