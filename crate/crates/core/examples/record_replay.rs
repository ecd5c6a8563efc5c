//! Records every completion a run makes, saves the fixture, and replays it
//! with a strict scripted backend that refuses unknown requests. The two
//! runs serialize to identical traces.
//!
//!     cargo run --example record_replay

use std::sync::{Arc, Mutex};

use vecot::backend::{record_fixture, ScriptedBackend, ScriptedFixture};
use vecot::demo::club_pack;
use vecot::editor::Method;
use vecot::{Pipeline, TemplateSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pack = club_pack(12)?;
    let templates = Arc::new(TemplateSet::builtin());

    // Stand-in for a live endpoint: the scripted pack behind a recorder.
    let sink = Arc::new(Mutex::new(ScriptedFixture::default()));
    let live = Arc::new(ScriptedBackend::new(pack.fixture.clone()));
    let recording = Arc::new(record_fixture(live, sink.clone()));
    let pipeline = Pipeline::new(
        recording,
        pack.retriever.clone(),
        templates.clone(),
        pack.config.clone(),
    )?;
    let first = pipeline.run_batch(&pack.instances, Method::VerifyEdit, 4, |_, _| {});

    let path = std::env::temp_dir().join(format!("vecot-record-replay-{}.json", std::process::id()));
    sink.lock().unwrap().save(&path)?;
    let recorded = ScriptedFixture::load(&path)?;
    println!("recorded {} requests to {}", recorded.len(), path.display());

    let replay = Pipeline::new(
        Arc::new(ScriptedBackend::new(recorded)),
        pack.retriever.clone(),
        templates,
        pack.config.clone(),
    )?;
    let second = replay.run_batch(&pack.instances, Method::VerifyEdit, 1, |_, _| {});
    std::fs::remove_file(&path)?;

    let same = serde_json::to_string(&first)? == serde_json::to_string(&second)?;
    println!("replayed {} instances, traces identical: {same}", second.len());
    for t in &second {
        println!("  {} edited={:<5} final={}", t.id, t.edited, t.final_answer);
    }
    Ok(())
}
