//! One verify-and-edit run against a live completion endpoint with
//! Wikipedia retrieval. Needs VECOT_API_KEY and network access.
//!
//!     VECOT_API_KEY=... cargo run --example live_wikipedia -- "Who directed the film Alive (1993)?"

use std::sync::Arc;

use vecot::backend::{HttpBackend, HttpBackendConfig};
use vecot::retrieval::{WikipediaConfig, WikipediaRetriever};
use vecot::{Instance, Pipeline, PipelineConfig, Task, TemplateSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let question = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "John Nyskohus played for which football club?".into());
    let backend = match HttpBackend::from_env(HttpBackendConfig::default()) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let pipeline = Pipeline::new(
        Arc::new(backend),
        Arc::new(WikipediaRetriever::new(WikipediaConfig::default())),
        Arc::new(TemplateSet::builtin()),
        PipelineConfig::for_task(Task::HotpotQa),
    )?;
    let trace = pipeline.run_instance(&Instance::new("live", Task::HotpotQa, question, ""));
    println!("{}", serde_json::to_string_pretty(&trace)?);
    Ok(())
}
