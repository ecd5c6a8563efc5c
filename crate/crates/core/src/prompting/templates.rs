use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PromptError;

/// Dataset family a prompt set was written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "hotpotqa")]
    HotpotQa,
    #[serde(rename = "2wikimultihop")]
    TwoWikiMultihop,
    #[serde(rename = "fever")]
    Fever,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::HotpotQa, Task::TwoWikiMultihop, Task::Fever];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::HotpotQa => "hotpotqa",
            Task::TwoWikiMultihop => "2wikimultihop",
            Task::Fever => "fever",
        }
    }

    /// Placeholder carrying the instance text: claims for Fever, questions otherwise.
    pub fn input_placeholder(&self) -> &'static str {
        match self {
            Task::Fever => "claim",
            _ => "question",
        }
    }

    /// Separator between evidence sentences in the verifying-answer context
    /// block, matching how each task's exemplars lay out their context.
    pub fn context_separator(&self) -> &'static str {
        match self {
            Task::HotpotQa => "\n",
            Task::TwoWikiMultihop | Task::Fever => " ",
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self, Task::Fever)
    }

    /// Stop sequences for few-shot answer generation: a blank line followed by
    /// the next exemplar's label.
    pub fn answer_stops(&self) -> Vec<String> {
        match self {
            Task::HotpotQa => vec!["\n\nQ:".into(), "\nQ:".into()],
            Task::TwoWikiMultihop => vec!["\n\nQuestion:".into(), "\nQuestion:".into(), "\n\nQ:".into()],
            Task::Fever => vec!["\n\nClaim:".into(), "\nClaim:".into()],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hotpotqa" | "hotpotqa_adv" | "hotpot" | "advhotpotqa" => Ok(Task::HotpotQa),
            "2wikimultihop" | "2wiki" | "2wikimultihopqa" => Ok(Task::TwoWikiMultihop),
            "fever" => Ok(Task::Fever),
            other => Err(PromptError::UnknownTemplate(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    Standard,
    Cot,
    VerifyingQuestion,
    VerifyingAnswer,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 4] = [
        TemplateKind::Standard,
        TemplateKind::Cot,
        TemplateKind::VerifyingQuestion,
        TemplateKind::VerifyingAnswer,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TemplateKind::Standard => "standard",
            TemplateKind::Cot => "cot",
            TemplateKind::VerifyingQuestion => "verifying_question",
            TemplateKind::VerifyingAnswer => "verifying_answer",
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    pub task: Task,
    pub kind: TemplateKind,
    pub body: String,
    pub shot_count: usize,
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn pieces(body: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let close = after.find('}');
        let name = close.map(|c| &after[..c]);
        match name {
            Some(name) if !name.is_empty() && name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_') => {
                out.push(Piece::Text(&rest[..open]));
                out.push(Piece::Slot(name));
                rest = &after[name.len() + 1..];
            }
            _ => {
                out.push(Piece::Text(&rest[..=open]));
                rest = after;
            }
        }
    }
    out.push(Piece::Text(rest));
    out
}

impl PromptTemplate {
    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for piece in pieces(&self.body) {
            if let Piece::Slot(name) = piece {
                if !seen.contains(&name) {
                    seen.push(name);
                }
            }
        }
        seen
    }

    /// Substitutes every `{name}` placeholder. Bound values are inserted
    /// verbatim and never re-scanned for placeholders.
    pub fn render(&self, bindings: &HashMap<&str, &str>) -> Result<String, PromptError> {
        let mut out = String::with_capacity(self.body.len() + 256);
        for piece in pieces(&self.body) {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(name) => match bindings.get(name) {
                    Some(value) => out.push_str(value),
                    None => {
                        return Err(PromptError::MissingBinding {
                            placeholder: name.to_string(),
                            template: format!("{}/{}", self.task, self.kind),
                        })
                    }
                },
            }
        }
        Ok(out)
    }
}

/// Renders `template` with the given `(placeholder, value)` pairs.
pub fn render(template: &PromptTemplate, bindings: &[(&str, &str)]) -> Result<String, PromptError> {
    template.render(&bindings.iter().copied().collect())
}

macro_rules! builtin {
    ($task:literal, $kind:literal) => {
        include_str!(concat!("../../prompts/", $task, "/", $kind, ".txt"))
    };
}

fn builtin_body(task: Task, kind: TemplateKind) -> &'static str {
    use TemplateKind::*;
    match (task, kind) {
        (Task::HotpotQa, Standard) => builtin!("hotpotqa", "standard"),
        (Task::HotpotQa, Cot) => builtin!("hotpotqa", "cot"),
        (Task::HotpotQa, VerifyingQuestion) => builtin!("hotpotqa", "verifying_question"),
        (Task::HotpotQa, VerifyingAnswer) => builtin!("hotpotqa", "verifying_answer"),
        (Task::TwoWikiMultihop, Standard) => builtin!("2wikimultihop", "standard"),
        (Task::TwoWikiMultihop, Cot) => builtin!("2wikimultihop", "cot"),
        (Task::TwoWikiMultihop, VerifyingQuestion) => builtin!("2wikimultihop", "verifying_question"),
        (Task::TwoWikiMultihop, VerifyingAnswer) => builtin!("2wikimultihop", "verifying_answer"),
        (Task::Fever, Standard) => builtin!("fever", "standard"),
        (Task::Fever, Cot) => builtin!("fever", "cot"),
        (Task::Fever, VerifyingQuestion) => builtin!("fever", "verifying_question"),
        (Task::Fever, VerifyingAnswer) => builtin!("fever", "verifying_answer"),
    }
}

/// Number of in-context exemplars shipped for each prompt.
pub fn expected_shots(task: Task, kind: TemplateKind) -> usize {
    match (task, kind) {
        (Task::Fever, TemplateKind::Standard | TemplateKind::Cot) => 3,
        (Task::Fever, TemplateKind::VerifyingAnswer) => 2,
        (_, TemplateKind::Standard | TemplateKind::Cot) => 6,
        (_, TemplateKind::VerifyingQuestion) => 2,
        (_, TemplateKind::VerifyingAnswer) => 3,
    }
}

/// File contents minus the final line terminator.
fn body_from_file(text: &str) -> String {
    let text = text.strip_suffix('\n').unwrap_or(text);
    text.strip_suffix('\r').unwrap_or(text).to_string()
}

/// All prompts for every task, keyed by `(task, kind)`.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: BTreeMap<(Task, TemplateKind), PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    /// The prompts compiled into the crate from `prompts/<task>/<kind>.txt`.
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        for task in Task::ALL {
            for kind in TemplateKind::ALL {
                templates.insert(
                    (task, kind),
                    PromptTemplate {
                        task,
                        kind,
                        body: body_from_file(builtin_body(task, kind)),
                        shot_count: expected_shots(task, kind),
                    },
                );
            }
        }
        Self { templates }
    }

    /// Loads `<dir>/<task>/<kind>.txt`; any file absent from `dir` keeps the
    /// built-in prompt.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        if !dir.is_dir() {
            return Err(PromptError::UnknownTemplate(format!(
                "template directory {} does not exist",
                dir.display()
            )));
        }
        let mut set = Self::builtin();
        for task in Task::ALL {
            for kind in TemplateKind::ALL {
                let path = dir.join(task.as_str()).join(format!("{}.txt", kind.as_str()));
                if path.is_file() {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| PromptError::UnknownTemplate(format!("{}: {e}", path.display())))?;
                    let t = set.templates.get_mut(&(task, kind)).expect("builtin covers all");
                    t.body = body_from_file(&text);
                }
            }
        }
        Ok(set)
    }

    pub fn get(&self, task: Task, kind: TemplateKind) -> Result<&PromptTemplate, PromptError> {
        self.templates
            .get(&(task, kind))
            .ok_or_else(|| PromptError::UnknownTemplate(format!("{task}/{kind}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }
}
