//! Exact match, ROC AUC and token cost on a handful of rows.
//!
//!     cargo run --example metrics

use vecot::eval::{cost, exact_match, roc_auc, CostModel};
use vecot::TokenUsage;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (pred, gold) in [
        ("düsseldorf.", "Düsseldorf"),
        ("The John Felix Anthony Cena", "John Felix Anthony Cena"),
        ("John Cena", "John Felix Anthony Cena"),
    ] {
        println!("EM({pred:?}, {gold:?}) = {}", exact_match(pred, gold));
    }

    let confidence = [0.9, 0.8, 0.8, 0.6, 0.4, 0.2];
    let correct = [true, true, false, true, false, false];
    println!(
        "\nAUC over {} rows = {:.4}",
        confidence.len(),
        roc_auc(&confidence, &correct)?
    );

    let model = CostModel::default();
    for usage in [
        TokenUsage::new(900, 100),
        TokenUsage::new(650, 50),
        TokenUsage::new(4200, 310),
    ] {
        println!("cost of {:>5} tokens = ${:.4}", usage.total(), cost(usage, &model));
    }
    Ok(())
}
