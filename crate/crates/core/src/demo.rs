//! Synthetic, fully scripted scenarios for examples, tests and replay demos.
//!
//! Nothing here talks to a network: every completion is canned in a
//! [`ScriptedFixture`] keyed by the exact request the pipeline will make.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;

use crate::backend::{BackendError, Completion, ScriptedFixture, TokenUsage};
use crate::consistency::{self, normalize_answer, ReasoningPath, SampleSet};
use crate::editor::{EditorError, Method, PipelineConfig, ScriptBuilder};
use crate::eval::Instance;
use crate::prompting::{compose_edited_rationale, parse_cot_for, Task, TemplateSet};
use crate::retrieval::{DatasetRetriever, OpenCorpusRetriever, Passage, Retriever, Source};

/// A scripted run: instances, canned completions and the settings they were
/// scripted for.
pub struct Scenario {
    pub instances: Vec<Instance>,
    pub fixture: ScriptedFixture,
    pub config: PipelineConfig,
    pub retriever: Arc<dyn Retriever>,
}

impl Scenario {
    /// Writes `dataset.json` (HotpotQA row shape, paragraphs as `context`)
    /// and the backend fixture `backend.json` into `dir`, which can then be
    /// passed to `vecot run --replay`. Returns the dataset path.
    pub fn write_replay_pack(&self, dir: &Path) -> io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let rows: Vec<serde_json::Value> = self
            .instances
            .iter()
            .map(|inst| {
                let mut row = json!({"_id": inst.id, "question": inst.question, "answer": inst.gold});
                if !inst.paragraphs.is_empty() {
                    let context: Vec<serde_json::Value> =
                        inst.paragraphs.iter().map(|p| json!([p.title, [p.text]])).collect();
                    row["context"] = context.into();
                }
                row
            })
            .collect();
        let dataset = dir.join("dataset.json");
        std::fs::write(&dataset, serde_json::to_string_pretty(&rows).map_err(io::Error::other)?)?;
        self.fixture
            .save(&dir.join(crate::cli::BACKEND_FIXTURE))
            .map_err(|e: BackendError| io::Error::other(e.to_string()))?;
        Ok(dataset)
    }
}

const SAMPLE_USAGE: TokenUsage = TokenUsage {
    prompt_tokens: 800,
    completion_tokens: 150,
};
const QUESTION_USAGE: TokenUsage = TokenUsage {
    prompt_tokens: 400,
    completion_tokens: 12,
};
const ANSWER_USAGE: TokenUsage = TokenUsage {
    prompt_tokens: 350,
    completion_tokens: 15,
};
const REANSWER_USAGE: TokenUsage = TokenUsage {
    prompt_tokens: 900,
    completion_tokens: 4,
};

fn scripted_config(task: Task) -> PipelineConfig {
    PipelineConfig {
        record_timings: false,
        ..PipelineConfig::for_task(task)
    }
}

/// Fixed per-token logprobs summing to `total` over four tokens.
fn tokens(total: f64) -> Vec<f64> {
    vec![total / 4.0; 4]
}

fn top_path(completions: &[Completion], task: Task) -> ReasoningPath {
    let paths: Vec<ReasoningPath> = completions
        .iter()
        .filter_map(|c| {
            parse_cot_for(task, &c.text).ok().map(|r| ReasoningPath {
                text: c.text.clone(),
                rationale: r,
                total_logprob: c.has_logprobs().then_some(c.total_logprob),
                token_count: c.token_logprobs.len(),
            })
        })
        .collect();
    let samples = SampleSet::new(paths);
    let report = consistency::score(&samples, normalize_answer).expect("scripted samples parse");
    samples.paths[report.top_path].clone()
}

pub const NYSKOHUS_QUESTION: &str = "John Nyskohus played for which football club?";
pub const NYSKOHUS_WRONG: &str = "Odd Grenland";
pub const NYSKOHUS_RIGHT: &str = "Adelaide City";
pub const NYSKOHUS_VERIFYING_QUESTION: &str = "What team did John Nyskohus play for?";
pub const NYSKOHUS_EVIDENCE: &str = "played for Adelaide City";

const NYSKOHUS_DOCS: [(&str, &str); 5] = [
    (
        "John Nyskohus",
        "John Nyskohus is an Australian former soccer player. He played for Adelaide City in the National Soccer League. Nyskohus was born in 1957.",
    ),
    (
        "Odd Grenland",
        "Odd Grenland is a Norwegian football club from Skien. The club plays in the Eliteserien.",
    ),
    (
        "Adelaide City",
        "Adelaide City is a soccer club based in Adelaide, South Australia. The club won the National Soccer League three times.",
    ),
    (
        "National Soccer League",
        "The National Soccer League was the top soccer competition in Australia until 2004.",
    ),
    ("Skien", "Skien is a city in Telemark county, Norway."),
];

/// Five-document corpus for the Nyskohus example.
pub fn nyskohus_corpus() -> OpenCorpusRetriever {
    OpenCorpusRetriever::new(NYSKOHUS_DOCS)
}

/// Writes the Nyskohus corpus as `{id, title, text}` JSON lines.
pub fn write_nyskohus_corpus(path: &Path) -> io::Result<()> {
    let mut out = String::new();
    for (i, (title, text)) in NYSKOHUS_DOCS.iter().enumerate() {
        out.push_str(&json!({"id": i.to_string(), "title": title, "text": text}).to_string());
        out.push('\n');
    }
    std::fs::write(path, out)
}

/// Low-consistency question whose top path names the wrong club; the
/// verifying question retrieves the right one and the re-answer changes.
pub fn nyskohus_scenario() -> Result<Scenario, EditorError> {
    let config = scripted_config(Task::HotpotQa);
    let retriever: Arc<dyn Retriever> = Arc::new(nyskohus_corpus());
    let templates = Arc::new(TemplateSet::builtin());
    let instance = Instance::new("nyskohus", Task::HotpotQa, NYSKOHUS_QUESTION, NYSKOHUS_RIGHT);

    let wrong = " First, John Nyskohus played for the Norwegian football team Odd Grenland. Second, Odd Grenland is a football club from Skien. The answer is Odd Grenland.";
    let samples = vec![
        Completion::new(wrong, tokens(-2.0)),
        Completion::new(
            " First, John Nyskohus played for Sydney Olympic. Second, Sydney Olympic is a soccer club. The answer is Sydney Olympic.",
            tokens(-2.4),
        ),
        Completion::new(wrong, tokens(-2.1)),
        Completion::new(
            " First, John Nyskohus played for Adelaide City. Second, Adelaide City is based in Adelaide. The answer is Adelaide City.",
            tokens(-2.6),
        ),
        Completion::new(
            " First, John Nyskohus played for Marconi Stallions. The answer is Marconi Stallions.",
            tokens(-2.2),
        ),
    ];

    let mut b = ScriptBuilder::new(templates, config.clone(), retriever.clone())?;
    b.samples(&instance, Method::VerifyEdit, &samples, SAMPLE_USAGE)?;
    let top = top_path(&samples, Task::HotpotQa);
    let (s1, s2) = (&top.rationale.sentences[0], &top.rationale.sentences[1]);
    let vq2 = "Where is Odd Grenland from?";
    b.verifying_question(
        &instance,
        s1,
        &format!(" {NYSKOHUS_VERIFYING_QUESTION}"),
        QUESTION_USAGE,
    )?;
    b.verifying_question(&instance, s2, &format!(" {vq2}"), QUESTION_USAGE)?;
    let va1 = "John Nyskohus played for Adelaide City in the National Soccer League.";
    let va2 = "Odd Grenland is a Norwegian football club from Skien.";
    b.verifying_answer(&instance, NYSKOHUS_VERIFYING_QUESTION, &format!(" {va1}"), ANSWER_USAGE)?;
    b.verifying_answer(&instance, vq2, &format!(" {va2}"), ANSWER_USAGE)?;
    b.reanswer(
        &instance,
        &format!("{va1} {va2}"),
        Completion::new(" Adelaide City.", vec![-0.05, -0.1, -0.02]),
        REANSWER_USAGE,
    )?;
    Ok(Scenario {
        instances: vec![instance],
        fixture: b.finish(),
        config,
        retriever,
    })
}

const FIRST_NAMES: [&str; 8] = ["Arlo", "Bruna", "Cyril", "Dagny", "Emeric", "Fenna", "Gustav", "Hester"];
const LAST_NAMES: [&str; 5] = ["Vance", "Okafor", "Lindqvist", "Moreau", "Takeda"];
const CLUBS: [(&str, &str); 10] = [
    ("Harbour Rovers", "Portsmere"),
    ("Kestrel Athletic", "Dunhollow"),
    ("Vale United", "Brackwater"),
    ("Ironbridge Town", "Ironbridge"),
    ("Saltmarsh City", "Saltmarsh"),
    ("Corvid Wanderers", "Eastfold"),
    ("Redcliff Albion", "Redcliff"),
    ("Northgate Celtic", "Northgate"),
    ("Thornbury Rangers", "Thornbury"),
    ("Lowmoor Dynamo", "Lowmoor"),
];

/// How one pack instance samples and how its edit goes.
struct Pattern {
    /// Candidate index per path; 0 is the true club.
    picks: [usize; 5],
    /// Total logprob per path.
    logprobs: [f64; 5],
    edit: EditScript,
}

#[derive(Clone, Copy, PartialEq)]
enum EditScript {
    /// Verifying answers restore the facts; the re-answer is correct.
    Fixes,
    /// The first verifying question comes back without a question mark.
    BadQuestion,
    /// The re-answer cannot be parsed, so the top answer stands.
    BadReanswer,
    /// Evidence is found but the re-answer repeats the wrong city.
    Stubborn,
}

const EQ: [f64; 5] = [-3.0; 5];

fn patterns() -> [Pattern; 12] {
    use EditScript::*;
    [
        Pattern {
            picks: [0, 0, 0, 0, 0],
            logprobs: EQ,
            edit: Fixes,
        },
        Pattern {
            picks: [1, 1, 1, 1, 1],
            logprobs: [-2.0, -4.0, -3.0, -6.5, -1.0],
            edit: Fixes,
        },
        Pattern {
            picks: [0, 0, 0, 0, 1],
            logprobs: EQ,
            edit: Fixes,
        },
        Pattern {
            picks: [1, 1, 1, 0, 2],
            logprobs: EQ,
            edit: Fixes,
        },
        Pattern {
            picks: [1, 1, 0, 2, 3],
            logprobs: EQ,
            edit: Fixes,
        },
        Pattern {
            picks: [0, 1, 2, 3, 4],
            logprobs: EQ,
            edit: BadQuestion,
        },
        // Majority count 3 for a wrong club, but low probability: the right
        // pair outweighs it and the gate keeps the instance.
        Pattern {
            picks: [1, 1, 1, 0, 0],
            logprobs: [-5.0, -5.0, -5.0, -0.1, -0.1],
            edit: Fixes,
        },
        Pattern {
            picks: [1, 1, 1, 0, 0],
            logprobs: [-1.0, -1.0, -1.0, -0.2, -0.2],
            edit: Fixes,
        },
        Pattern {
            picks: [2, 2, 0, 0, 1],
            logprobs: EQ,
            edit: BadReanswer,
        },
        // Majority count 3 with weight just under 3.
        Pattern {
            picks: [0, 0, 1, 1, 1],
            logprobs: [-0.05, -0.05, -0.1, -0.1, -0.1],
            edit: Fixes,
        },
        Pattern {
            picks: [3, 3, 3, 3, 0],
            logprobs: [-1.5, -2.5, -1.0, -3.0, -0.5],
            edit: Fixes,
        },
        Pattern {
            picks: [4, 4, 0, 1, 2],
            logprobs: EQ,
            edit: Stubborn,
        },
    ]
}

struct Entity {
    name: String,
    clubs: Vec<(&'static str, &'static str)>,
}

fn entity(i: usize) -> Entity {
    Entity {
        name: format!("{} {}", FIRST_NAMES[i % 8], LAST_NAMES[(i / 8) % 5]),
        clubs: (0..5).map(|j| CLUBS[(i + 3 * j) % CLUBS.len()]).collect(),
    }
}

fn path_text(e: &Entity, pick: usize) -> String {
    let (club, city) = e.clubs[pick];
    format!(
        " First, {name} played for {club}. Second, {club} is based in {city}. The answer is {city}.",
        name = e.name
    )
}

fn paragraphs(e: &Entity) -> Vec<Passage> {
    let (club, city) = e.clubs[0];
    let (decoy, decoy_city) = e.clubs[1];
    [
        (
            e.name.clone(),
            format!(
                "{n} is a retired footballer. {n} played for {club} for six seasons.",
                n = e.name
            ),
        ),
        (
            club.to_string(),
            format!("{club} is a professional football club. {club} is based in {city}."),
        ),
        (
            decoy.to_string(),
            format!("{decoy} is a football club based in {decoy_city}."),
        ),
        (
            format!("{} (disambiguation)", e.name),
            format!("{} is also the name of a painter born in {}.", e.name, e.clubs[2].1),
        ),
    ]
    .into_iter()
    .enumerate()
    .map(|(rank, (title, text))| Passage::new(Source::Dataset, title, text, rank))
    .collect()
}

/// `count` HotpotQA-style instances (up to 40 distinct players) cycling
/// through twelve consistency patterns, scripted for the dataset
/// retriever. Every instance the default gate (or any threshold up to n)
/// would edit has its editing pass scripted.
pub fn club_pack(count: usize) -> Result<Scenario, EditorError> {
    assert!(
        count <= FIRST_NAMES.len() * LAST_NAMES.len(),
        "at most 40 distinct players"
    );
    let task = Task::HotpotQa;
    let config = scripted_config(task);
    let retriever: Arc<dyn Retriever> = Arc::new(DatasetRetriever);
    let templates = Arc::new(TemplateSet::builtin());
    let mut b = ScriptBuilder::new(templates, config.clone(), retriever.clone())?;
    let patterns = patterns();
    let mut instances = Vec::with_capacity(count);

    for i in 0..count {
        let p = &patterns[i % patterns.len()];
        let e = entity(i);
        let question = format!("{} played for a football club based in which city?", e.name);
        let instance =
            Instance::new(format!("club-{i:02}"), task, question, e.clubs[0].1).with_paragraphs(paragraphs(&e));
        // Later cycles shift the first path's probability so scores vary.
        let shift = (i / patterns.len()) as f64 * 0.15;
        let samples: Vec<Completion> = p
            .picks
            .iter()
            .zip(p.logprobs)
            .enumerate()
            .map(|(j, (&pick, lp))| Completion::new(path_text(&e, pick), tokens(if j == 0 { lp - shift } else { lp })))
            .collect();
        b.samples(&instance, Method::VerifyEdit, &samples, SAMPLE_USAGE)?;

        let top = top_path(&samples, task);
        if top.rationale.sentences.len() != 2 {
            unreachable!("pack paths have two sentences");
        }
        let (s1, s2) = (&top.rationale.sentences[0], &top.rationale.sentences[1]);
        let top_club = e
            .clubs
            .iter()
            .find(|(_, city)| *city == top.rationale.answer)
            .map(|(club, _)| *club)
            .expect("top answer is a candidate city");
        let vq1 = format!("What team did {} play for?", e.name);
        let vq2 = format!("Where is {top_club} based?");
        if p.edit == EditScript::BadQuestion {
            b.verifying_question(&instance, s1, " Check which team this was.", QUESTION_USAGE)?;
        } else {
            b.verifying_question(&instance, s1, &format!(" {vq1}"), QUESTION_USAGE)?;
        }
        b.verifying_question(&instance, s2, &format!(" {vq2}"), QUESTION_USAGE)?;

        let (true_club, true_city) = e.clubs[0];
        let va1 = format!("{} played for {true_club}.", e.name);
        let va2 = if top_club == true_club {
            format!("{true_club} is based in {true_city}.")
        } else {
            format!("{top_club} is based in {}.", top.rationale.answer)
        };
        if p.edit != EditScript::BadQuestion {
            b.verifying_answer(&instance, &vq1, &format!(" {va1}"), ANSWER_USAGE)?;
        }
        b.verifying_answer(&instance, &vq2, &format!(" {va2}"), ANSWER_USAGE)?;

        let verified = if p.edit == EditScript::BadQuestion {
            vec![s1.clone(), va2]
        } else {
            vec![va1, va2]
        };
        let edited = compose_edited_rationale(&top.rationale, &verified).expect("two statements");
        let reply = match p.edit {
            EditScript::BadReanswer => Completion::new("\n", vec![-1.2]),
            EditScript::Stubborn => Completion::new(format!(" {}.", top.rationale.answer), vec![-0.9, -0.4]),
            EditScript::Fixes | EditScript::BadQuestion => {
                Completion::new(format!(" {true_city}."), vec![-0.05 * (1 + i % 4) as f64, -0.1])
            }
        };
        b.reanswer(&instance, &edited, reply, REANSWER_USAGE)?;
        instances.push(instance);
    }
    Ok(Scenario {
        instances,
        fixture: b.finish(),
        config,
        retriever,
    })
}
