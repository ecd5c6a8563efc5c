//! Sweeps the edit threshold over the scripted 40-instance pack. Samples are
//! drawn once; each threshold only changes which instances get edited.
//!
//!     cargo run --example threshold_ablation

use std::sync::Arc;

use vecot::backend::ScriptedBackend;
use vecot::cli::default_thresholds;
use vecot::demo::club_pack;
use vecot::eval::{ablate_threshold, write_ablation_csv, CostModel};
use vecot::{Pipeline, Task, TemplateSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pack = club_pack(40)?;
    let pipeline = Pipeline::new(
        Arc::new(ScriptedBackend::new(pack.fixture.clone())),
        pack.retriever.clone(),
        Arc::new(TemplateSet::builtin()),
        pack.config.clone(),
    )?;
    let thresholds = default_thresholds(pack.config.n_samples);
    let rows = ablate_threshold(&pipeline, &pack.instances, &thresholds, 4, &CostModel::default())?;

    println!(
        "{:>9} {:>6} {:>6} {:>8} {:>9}",
        "threshold", "em", "auc", "edited", "cost $"
    );
    for r in &rows {
        let a = &r.aggregates;
        println!(
            "{:>9} {:>6.3} {:>6} {:>8.3} {:>9.4}",
            r.threshold,
            a.em_or_accuracy,
            a.auc.map_or("-".to_string(), |x| format!("{x:.3}")),
            a.edit_fraction,
            a.total_cost_usd
        );
    }
    println!();
    write_ablation_csv(std::io::stdout().lock(), &rows, Task::HotpotQa)?;
    Ok(())
}
