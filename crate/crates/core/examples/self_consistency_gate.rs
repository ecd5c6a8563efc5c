//! Scores a few hand-made sample sets and shows where the edit gate falls.
//!
//!     cargo run --example self_consistency_gate

use vecot::consistency::{score, should_edit, should_edit_at};
use vecot::prompting::parse_cot;
use vecot::{normalize_answer, ReasoningPath, SampleSet};

fn samples(answers: &[(&str, Option<f64>)]) -> SampleSet {
    SampleSet::new(
        answers
            .iter()
            .map(|(answer, lp)| {
                let text = format!(" First, some reasoning. The answer is {answer}.");
                ReasoningPath {
                    rationale: parse_cot(&text).expect("well formed"),
                    text,
                    total_logprob: *lp,
                    token_count: 12,
                }
            })
            .collect(),
    )
}

type Case<'a> = (&'a str, Vec<(&'a str, Option<f64>)>);

fn main() {
    let cases: [Case; 4] = [
        ("unanimous", vec![("Skien", Some(-3.0)); 5]),
        (
            "three-two majority, equal probabilities",
            vec![
                ("Skien", Some(-3.0)),
                ("skien.", Some(-3.0)),
                ("The Skien", Some(-3.0)),
                ("Adelaide", Some(-3.0)),
                ("Adelaide", Some(-3.0)),
            ],
        ),
        (
            "majority by count, minority by probability",
            vec![
                ("Skien", Some(-1.0)),
                ("Skien", Some(-1.0)),
                ("Skien", Some(-1.0)),
                ("Adelaide", Some(-0.2)),
                ("Adelaide", Some(-0.2)),
            ],
        ),
        (
            "no logprobs (count fallback)",
            vec![
                ("Skien", None),
                ("Oslo", None),
                ("Bergen", None),
                ("Skien", None),
                ("Oslo", Some(-1.0)),
            ],
        ),
    ];
    for (label, answers) in cases {
        let report = score(&samples(&answers), normalize_answer).expect("non-empty");
        println!("{label}");
        for (answer, group) in &report.groups {
            println!("  {answer:<10} count {} weight {:.4}", group.count, group.weight);
        }
        println!(
            "  top {:?}: weighted {:.4}, majority {}, edit at default threshold {}: {}",
            report.top_answer,
            report.weighted_score,
            report.majority_score,
            report.majority_threshold(),
            should_edit(&report)
        );
        let sweep: Vec<String> = [1.0, 2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|t| format!("{t}:{}", if should_edit_at(&report, *t) { "edit" } else { "keep" }))
            .collect();
        println!("  sweep {}\n", sweep.join(" "));
    }
}
