//! Draws a balanced challenge set of correct and incorrect ids.
//!
//!     cargo run --example balanced_subsample -- 10 42

use vecot::eval::{balanced_subsample, ConfidenceSource, EvalResult};
use vecot::TokenUsage;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let target: usize = args.next().map_or(Ok(10), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(0), |a| a.parse())?;

    let rows: Vec<EvalResult> = (0..60)
        .map(|i| EvalResult {
            id: format!("q{i:02}"),
            predicted: String::new(),
            gold: String::new(),
            correct: i % 4 == 0,
            confidence: 0.5,
            confidence_source: ConfidenceSource::ConsistencyWeight,
            edited: false,
            weighted_score: None,
            majority_score: None,
            n: 5,
            usage: TokenUsage::default(),
            cost_usd: 0.0,
            failed: false,
        })
        .collect();
    let ids = balanced_subsample(&rows, target, seed)?;
    let correct = ids
        .iter()
        .filter(|id| rows.iter().any(|r| &r.id == *id && r.correct))
        .count();
    println!("{} ids ({correct} correct) with seed {seed}:", ids.len());
    println!("{}", ids.join(" "));
    Ok(())
}
