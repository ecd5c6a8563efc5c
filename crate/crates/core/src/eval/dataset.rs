use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::EvalError;
use crate::prompting::{parse_label, Task};
use crate::retrieval::{Passage, Source};

/// One question (or claim) with its gold answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub task: Task,
    /// The question; the claim for Fever.
    pub question: String,
    /// Gold answer, or the canonical label for Fever.
    pub gold: String,
    /// Supporting and distractor paragraphs shipped with the instance.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paragraphs: Vec<Passage>,
}

impl Instance {
    pub fn new(id: impl Into<String>, task: Task, question: impl Into<String>, gold: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            task,
            question: question.into(),
            gold: gold.into(),
            paragraphs: Vec::new(),
        }
    }

    pub fn with_paragraphs(mut self, paragraphs: Vec<Passage>) -> Self {
        self.paragraphs = paragraphs;
        self
    }
}

fn schema(row: usize, reason: impl Into<String>) -> EvalError {
    EvalError::Schema {
        row,
        reason: reason.into(),
    }
}

fn id_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.trim().is_empty() => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn text_field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Option<&'a str> {
    obj.get(key)
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

fn paragraph_text(body: &Value) -> Option<String> {
    match body {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Array(sents) => {
            let parts: Option<Vec<&str>> = sents.iter().map(|s| s.as_str().map(str::trim)).collect();
            Some(
                parts?
                    .into_iter()
                    .filter(|s| !s.is_empty())
                    .collect::<Vec<_>>()
                    .join(" "),
            )
        }
        _ => None,
    }
}

/// Accepts `[[title, sentences-or-text], ...]` and
/// `{"title": [...], "sentences": [[...], ...]}`.
fn parse_context(row: usize, ctx: &Value) -> Result<Vec<Passage>, EvalError> {
    let bad = || schema(row, "context must be [[title, sentences], ...] or {title, sentences}");
    let pairs: Vec<(String, String)> = match ctx {
        Value::Array(items) => items
            .iter()
            .map(|item| {
                let pair = item.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
                let title = pair[0].as_str().ok_or_else(bad)?.to_string();
                Ok((title, paragraph_text(&pair[1]).ok_or_else(bad)?))
            })
            .collect::<Result<_, EvalError>>()?,
        Value::Object(obj) => {
            let titles = obj.get("title").and_then(Value::as_array).ok_or_else(bad)?;
            let bodies = obj.get("sentences").and_then(Value::as_array).ok_or_else(bad)?;
            if titles.len() != bodies.len() {
                return Err(bad());
            }
            titles
                .iter()
                .zip(bodies)
                .map(|(t, b)| {
                    Ok((
                        t.as_str().ok_or_else(bad)?.to_string(),
                        paragraph_text(b).ok_or_else(bad)?,
                    ))
                })
                .collect::<Result<_, EvalError>>()?
        }
        _ => return Err(bad()),
    };
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(rank, (title, text))| Passage::new(Source::Dataset, title, text, rank))
        .collect())
}

fn parse_row(task: Task, row: usize, value: &Value) -> Result<Instance, EvalError> {
    let obj = value.as_object().ok_or_else(|| schema(row, "expected a JSON object"))?;
    let id = obj
        .get("_id")
        .or_else(|| obj.get("id"))
        .and_then(id_of)
        .ok_or_else(|| schema(row, "missing id"))?;
    match task {
        Task::Fever => {
            let claim = text_field(obj, "claim").ok_or_else(|| schema(row, "missing claim"))?;
            let raw = text_field(obj, "label").ok_or_else(|| schema(row, "missing label"))?;
            let gold = parse_label(raw).map_err(|_| schema(row, format!("{raw:?} is not a Fever label")))?;
            Ok(Instance::new(id, task, claim, gold))
        }
        Task::HotpotQa | Task::TwoWikiMultihop => {
            let question = text_field(obj, "question").ok_or_else(|| schema(row, "missing question"))?;
            let gold = match obj.get("answer") {
                Some(Value::String(s)) if !s.trim().is_empty() => s.trim().to_string(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err(schema(row, "missing answer")),
            };
            let paragraphs = match obj.get("context") {
                Some(ctx) => parse_context(row, ctx)?,
                None => Vec::new(),
            };
            Ok(Instance::new(id, task, question, gold).with_paragraphs(paragraphs))
        }
    }
}

/// Reads a JSON array or JSON-lines file of dataset rows. Row numbers in
/// errors are 1-based array positions or line numbers.
pub fn load_dataset(path: &Path, task: Task) -> Result<Vec<Instance>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    let rows: Vec<(usize, Value)> = if text.trim_start().starts_with('[') {
        let values: Vec<Value> = serde_json::from_str(&text).map_err(|e| schema(e.line(), e.to_string()))?;
        values.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect()
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map(|v| (i + 1, v))
                    .map_err(|e| schema(i + 1, e.to_string()))
            })
            .collect::<Result<_, _>>()?
    };
    let instances: Vec<Instance> = rows
        .iter()
        .map(|(row, v)| parse_row(task, *row, v))
        .collect::<Result<_, _>>()?;
    let mut seen = HashMap::new();
    for (row, inst) in rows.iter().map(|(r, _)| *r).zip(&instances) {
        if let Some(first) = seen.insert(inst.id.as_str(), row) {
            return Err(schema(
                row,
                format!("duplicate id {:?} (first at row {first})", inst.id),
            ));
        }
    }
    Ok(instances)
}

/// Newline-separated instance ids; blank lines are skipped.
pub fn load_index(path: &Path) -> Result<Vec<String>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Keeps the instances named in `ids`, in that order.
pub fn apply_index(instances: Vec<Instance>, ids: &[String]) -> Result<Vec<Instance>, EvalError> {
    let mut by_id: HashMap<String, Instance> = instances.into_iter().map(|i| (i.id.clone(), i)).collect();
    ids.iter()
        .map(|id| by_id.remove(id).ok_or_else(|| EvalError::UnknownIndexId(id.clone())))
        .collect()
}

/// Writes ids one per line.
pub fn write_index(path: &Path, ids: &[String]) -> Result<(), EvalError> {
    let mut text = ids.join("\n");
    if !ids.is_empty() {
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| EvalError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn hotpot_array_with_paragraphs() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "h.json",
            r#"[{"_id": "a1", "question": "Q?", "answer": "Düsseldorf", "extra": 1,
                "context": [["Die Krupps", ["Die Krupps is a band.", " It formed in Düsseldorf."]],
                            ["Other", "Unrelated text."]]}]"#,
        );
        let got = load_dataset(&p, Task::HotpotQa).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].gold, "Düsseldorf");
        assert_eq!(got[0].paragraphs.len(), 2);
        assert_eq!(
            got[0].paragraphs[0].text,
            "Die Krupps is a band. It formed in Düsseldorf."
        );
        assert_eq!(got[0].paragraphs[1].rank, 1);
    }

    #[test]
    fn hf_style_context_and_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "w.jsonl",
            "{\"id\": \"x\", \"question\": \"Q?\", \"answer\": \"A\", \"context\": {\"title\": [\"T\"], \"sentences\": [[\"S one.\", \"S two.\"]]}}\n\n{\"id\": \"y\", \"question\": \"R?\", \"answer\": 1991}\n",
        );
        let got = load_dataset(&p, Task::TwoWikiMultihop).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].paragraphs[0].text, "S one. S two.");
        assert_eq!(got[1].gold, "1991");
        assert!(got[1].paragraphs.is_empty());
    }

    #[test]
    fn schema_errors_carry_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "h.jsonl",
            "{\"id\": \"a\", \"question\": \"Q?\", \"answer\": \"A\"}\n{\"id\": \"b\", \"question\": \"Q?\"}\n",
        );
        match load_dataset(&p, Task::HotpotQa) {
            Err(EvalError::Schema { row, reason }) => {
                assert_eq!(row, 2);
                assert!(reason.contains("answer"));
            }
            other => panic!("{other:?}"),
        }
        let p = write(&dir, "d.jsonl", "{\"id\": \"a\", \"question\": \"Q?\", \"answer\": \"A\"}\n{\"id\": \"a\", \"question\": \"Q?\", \"answer\": \"B\"}\n");
        assert!(matches!(
            load_dataset(&p, Task::HotpotQa),
            Err(EvalError::Schema { row: 2, .. })
        ));
    }

    #[test]
    fn fever_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "f.jsonl",
            "{\"id\": 7, \"claim\": \"Black Mirror is about society.\", \"label\": \"supports\"}\n",
        );
        let got = load_dataset(&p, Task::Fever).unwrap();
        assert_eq!(got[0].id, "7");
        assert_eq!(got[0].gold, "SUPPORTS");
        let p = write(&dir, "g.jsonl", "{\"id\": 7, \"claim\": \"c\", \"label\": \"MAYBE\"}\n");
        assert!(matches!(
            load_dataset(&p, Task::Fever),
            Err(EvalError::Schema { row: 1, .. })
        ));
    }

    #[test]
    fn index_filters_and_orders() {
        let dir = tempfile::tempdir().unwrap();
        let insts: Vec<Instance> = (0..5)
            .map(|i| Instance::new(format!("i{i}"), Task::Fever, "c", "SUPPORTS"))
            .collect();
        let idx = write(&dir, "idx.txt", "i3\n\ni1\n");
        let ids = load_index(&idx).unwrap();
        let got = apply_index(insts.clone(), &ids).unwrap();
        assert_eq!(got.iter().map(|i| i.id.as_str()).collect::<Vec<_>>(), ["i3", "i1"]);
        assert!(matches!(
            apply_index(insts, &["zz".to_string()]),
            Err(EvalError::UnknownIndexId(_))
        ));
        let out = dir.path().join("out.txt");
        write_index(&out, &ids).unwrap();
        assert_eq!(load_index(&out).unwrap(), ids);
    }
}
