//! Few-shot prompts and chain-of-thought parsing.

mod sentences;
mod templates;

use serde::{Deserialize, Serialize};

pub use sentences::split_sentences;
pub use templates::{expected_shots, render, PromptTemplate, Task, TemplateKind, TemplateSet};

/// Clause introducing the final answer of a chain-of-thought completion.
pub const ANSWER_CLAUSE: &str = "The answer is";

/// Fever's three labels.
pub const FEVER_LABELS: [&str; 3] = ["SUPPORTS", "REFUTES", "NOT ENOUGH INFO"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("placeholder {{{placeholder}}} is unbound in template {template}")]
    MissingBinding { placeholder: String, template: String },
    #[error("unknown template: {0}")]
    UnknownTemplate(String),
    #[error("could not parse completion: {0}")]
    ParseFailure(String),
    #[error("expected {expected} verified statements, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// A parsed chain of thought.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Rationale {
    /// Reasoning sentences, excluding the answer clause.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sentences: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub answer_sentence: String,
    pub answer: String,
}

fn strip_terminal_periods(s: &str) -> &str {
    s.trim().trim_end_matches('.').trim_end()
}

/// Parses "First, ... Second, ... The answer is X." into sentences and answer.
///
/// The last answer clause wins; the answer runs to the end of its line with
/// trailing periods removed.
pub fn parse_cot(completion_text: &str) -> Result<Rationale, PromptError> {
    let lowered = completion_text.to_ascii_lowercase();
    let needle = ANSWER_CLAUSE.to_ascii_lowercase();
    let at = lowered
        .rfind(&needle)
        .ok_or_else(|| PromptError::ParseFailure(format!("no {ANSWER_CLAUSE:?} clause in {completion_text:?}")))?;
    let after = &completion_text[at + needle.len()..];
    let line = after.split('\n').next().unwrap_or("");
    let answer = strip_terminal_periods(line);
    if answer.is_empty() {
        return Err(PromptError::ParseFailure(format!(
            "empty answer after {ANSWER_CLAUSE:?} in {completion_text:?}"
        )));
    }
    let answer_sentence = completion_text[at..at + needle.len() + line.len()].trim().to_string();
    let sentences = split_sentences(&completion_text[..at])
        .into_iter()
        .map(str::to_string)
        .collect();
    Ok(Rationale {
        sentences,
        answer_sentence,
        answer: answer.to_string(),
    })
}

/// Canonical Fever label for `raw`, compared after uppercasing.
pub fn parse_label(raw: &str) -> Result<String, PromptError> {
    let upper = strip_terminal_periods(raw).to_uppercase();
    let upper = upper.split_whitespace().collect::<Vec<_>>().join(" ");
    FEVER_LABELS
        .iter()
        .find(|l| **l == upper)
        .map(|l| l.to_string())
        .ok_or_else(|| PromptError::ParseFailure(format!("{raw:?} is not a Fever label")))
}

/// [`parse_cot`] plus label validation for classification tasks.
pub fn parse_cot_for(task: Task, completion_text: &str) -> Result<Rationale, PromptError> {
    let mut rationale = parse_cot(completion_text)?;
    if task.is_classification() {
        rationale.answer = parse_label(&rationale.answer)?;
    }
    Ok(rationale)
}

/// Parses a standard-prompt completion: the answer is the first non-empty line.
pub fn parse_direct(task: Task, completion_text: &str) -> Result<Rationale, PromptError> {
    let line = completion_text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("");
    let answer = strip_terminal_periods(line);
    if answer.is_empty() {
        return Err(PromptError::ParseFailure(format!(
            "empty direct answer in {completion_text:?}"
        )));
    }
    let answer = if task.is_classification() {
        parse_label(answer)?
    } else {
        answer.to_string()
    };
    Ok(Rationale {
        sentences: Vec::new(),
        answer_sentence: String::new(),
        answer,
    })
}

/// First line of a verifying-question completion that ends in `?`.
pub fn extract_question(completion_text: &str) -> Result<String, PromptError> {
    completion_text
        .lines()
        .map(str::trim)
        .find(|l| l.ends_with('?'))
        .map(str::to_string)
        .ok_or_else(|| PromptError::ParseFailure(format!("no question in {completion_text:?}")))
}

/// First non-empty line of a verifying-answer completion.
pub fn extract_statement(completion_text: &str) -> Option<String> {
    completion_text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .map(str::to_string)
}

fn terminate(sentence: &str) -> String {
    let trimmed = sentence.trim();
    let body = trimmed.trim_end_matches('.');
    if body.len() < trimmed.len() {
        // Collapse ".." (as in some exemplar answers) to a single period.
        format!("{body}.")
    } else if trimmed.ends_with(['?', '!']) {
        trimmed.to_string()
    } else {
        format!("{trimmed}.")
    }
}

/// Joins verified statements, in the original sentence order, into the text
/// that replaces the rationale in the re-answer prompt.
pub fn compose_edited_rationale(original: &Rationale, verified: &[String]) -> Result<String, PromptError> {
    if verified.len() != original.sentences.len() {
        return Err(PromptError::LengthMismatch {
            expected: original.sentences.len(),
            got: verified.len(),
        });
    }
    Ok(verified
        .iter()
        .map(|s| terminate(s))
        .filter(|s| s != ".")
        .collect::<Vec<_>>()
        .join(" "))
}

/// Renders the chain-of-thought prompt for `input` and appends the edited
/// rationale followed by the answer clause, so the model only completes the
/// answer.
pub fn reanswer_prompt(
    templates: &TemplateSet,
    task: Task,
    input: &str,
    edited_rationale: &str,
) -> Result<String, PromptError> {
    let cot = templates.get(task, TemplateKind::Cot)?;
    let mut prompt = render(cot, &[(task.input_placeholder(), input)])?;
    if !edited_rationale.trim().is_empty() {
        prompt.push(' ');
        prompt.push_str(edited_rationale.trim());
    }
    prompt.push(' ');
    prompt.push_str(ANSWER_CLAUSE);
    Ok(prompt)
}
