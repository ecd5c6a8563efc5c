//! Prints the prompt the pipeline would send for one task and template kind.
//!
//!     cargo run --example render_prompts -- fever verifying_question "Some claim." "First, a reason."

use vecot::prompting::render;
use vecot::{Task, TemplateKind, TemplateSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let task: Task = args.first().map(String::as_str).unwrap_or("hotpotqa").parse()?;
    let kind_name = args.get(1).map(String::as_str).unwrap_or("cot");
    let kind = TemplateKind::ALL
        .into_iter()
        .find(|k| k.as_str() == kind_name)
        .ok_or_else(|| {
            format!("unknown kind {kind_name}; one of standard, cot, verifying_question, verifying_answer")
        })?;
    let input = args.get(2).cloned().unwrap_or_else(|| match task {
        Task::Fever => "John Nyskohus played for Odd Grenland.".into(),
        _ => "John Nyskohus played for which football club?".into(),
    });
    let second = args
        .get(3)
        .cloned()
        .unwrap_or_else(|| "First, John Nyskohus played for Odd Grenland.".into());

    let templates = TemplateSet::builtin();
    let template = templates.get(task, kind)?;
    let bindings: Vec<(&str, &str)> = template
        .placeholders()
        .into_iter()
        .map(|p| match p {
            "question" | "claim" | "verifying_question" => (p, input.as_str()),
            _ => (p, second.as_str()),
        })
        .collect();
    print!("{}", render(template, &bindings)?);
    println!();
    eprintln!(
        "[{} exemplars expected, placeholders {:?}]",
        vecot::prompting::expected_shots(task, kind),
        template.placeholders()
    );
    Ok(())
}
