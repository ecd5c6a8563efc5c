//! The Nyskohus walkthrough: five scripted samples disagree, the gate fires,
//! the first rationale sentence is checked against a five-document corpus
//! and the re-answer lands on the right club.
//!
//!     cargo run --example nyskohus_walkthrough

use std::sync::Arc;

use vecot::backend::ScriptedBackend;
use vecot::demo::nyskohus_scenario;
use vecot::{Pipeline, TemplateSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = nyskohus_scenario()?;
    let pipeline = Pipeline::new(
        Arc::new(ScriptedBackend::new(scenario.fixture.clone())),
        scenario.retriever.clone(),
        Arc::new(TemplateSet::builtin()),
        scenario.config.clone(),
    )?;
    let instance = &scenario.instances[0];
    let trace = pipeline.run_instance(instance);

    println!("Q: {}", instance.question);
    for (i, path) in trace.samples.paths.iter().enumerate() {
        println!("  sample {i}: {:<20} logprob {:?}", path.answer(), path.total_logprob);
    }
    let report = trace.report.as_ref().expect("samples parsed");
    println!(
        "top answer {:?}, weighted score {:.3} (threshold {}), edited: {}",
        report.top_answer,
        report.weighted_score,
        pipeline.config().threshold(),
        trace.edited
    );
    for step in &trace.steps {
        println!("\n  sentence:  {}", step.original_sentence);
        if let Some(q) = &step.verifying_question {
            println!("  question:  {q}");
        }
        if let Some(evidence) = &step.evidence {
            for s in &evidence.top_sentences {
                println!("  evidence:  [{:.3}] {}", s.score, s.sentence);
            }
        }
        println!("  verified:  {}", step.verified_statement);
    }
    println!(
        "\nedited rationale: {}",
        trace.edited_rationale.as_deref().unwrap_or("")
    );
    println!("final answer: {} (gold {})", trace.final_answer, instance.gold);
    println!("tokens used: {}", trace.usage.total());
    Ok(())
}
