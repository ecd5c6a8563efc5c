//! The per-instance verify-and-edit procedure, its baselines, and batch
//! execution.
//!
//! [`Pipeline::run_instance`] samples `n` chain-of-thought paths, scores
//! them, and when the winning weight is below the edit threshold rewrites
//! every rationale sentence of the representative path from retrieved
//! evidence before asking the model for a new answer. Stage failures inside
//! the editing pass never abort the instance; see [`StepFallback`].

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, BackendError, Completion, CompletionRequest, TokenUsage, DEFAULT_MAX_TOKENS};
use crate::consistency::{self, majority_threshold, normalize_answer, ConsistencyReport, ReasoningPath, SampleSet};
use crate::eval::Instance;
use crate::prompting::{
    self, compose_edited_rationale, extract_question, extract_statement, parse_cot_for, parse_direct, reanswer_prompt,
    PromptError, Rationale, Task, TemplateKind, TemplateSet, ANSWER_CLAUSE,
};
use crate::retrieval::{gather_evidence, EvidenceSet, RankerConfig, RetrievalError, Retriever};

mod script;

pub use script::ScriptBuilder;

/// Stop sequence for verifying questions and answers, which are one line.
const LINE_STOP: &str = "\n";

#[derive(Debug, thiserror::Error)]
pub enum EditorError {
    #[error("instance {id}: no parseable sample among {attempted}")]
    InstanceFailed { id: String, attempted: usize },
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Which procedure produces the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Answer-only prompt, greedy.
    Standard,
    /// Chain-of-thought prompt, one greedy path.
    Cot,
    /// `n` sampled paths, majority answer.
    CotSc,
    /// `n` sampled paths, gated editing.
    VerifyEdit,
}

impl std::str::FromStr for Method {
    type Err = EditorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "standard" => Ok(Method::Standard),
            "cot" => Ok(Method::Cot),
            "cot-sc" | "self-consistency" => Ok(Method::CotSc),
            "verify-edit" | "ve" => Ok(Method::VerifyEdit),
            other => Err(EditorError::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub task: Task,
    pub n_samples: usize,
    pub sample_temperature: f64,
    /// Gate threshold on the weighted score; `None` means `ceil(n_samples / 2)`.
    pub edit_threshold: Option<f64>,
    pub ranker: RankerConfig,
    pub max_tokens: u32,
    /// Wall-clock timings in traces. Off for byte-reproducible replays.
    pub record_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            task: Task::HotpotQa,
            n_samples: 5,
            sample_temperature: 0.7,
            edit_threshold: None,
            ranker: RankerConfig::default(),
            max_tokens: DEFAULT_MAX_TOKENS,
            record_timings: true,
        }
    }
}

impl PipelineConfig {
    pub fn for_task(task: Task) -> Self {
        Self {
            task,
            ..Self::default()
        }
    }

    pub fn threshold(&self) -> f64 {
        self.edit_threshold
            .unwrap_or_else(|| majority_threshold(self.n_samples))
    }

    pub fn validate(&self) -> Result<(), EditorError> {
        if self.n_samples == 0 {
            return Err(EditorError::Config("n_samples must be at least 1".into()));
        }
        let t = self.threshold();
        if !(0.0..=self.n_samples as f64).contains(&t) {
            return Err(EditorError::Config(format!(
                "edit_threshold {t} outside [0, {}]",
                self.n_samples
            )));
        }
        if !self.sample_temperature.is_finite() || self.sample_temperature < 0.0 {
            return Err(EditorError::Config(format!(
                "sample_temperature {} must be finite and non-negative",
                self.sample_temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(EditorError::Config("max_tokens must be positive".into()));
        }
        self.ranker.validate()?;
        Ok(())
    }
}

/// Why a rationale sentence was kept instead of replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepFallback {
    QuestionUnparseable,
    QuestionBackendError,
    RetrievalError,
    EmptyEvidence,
    AnswerBackendError,
    EmptyAnswer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationStep {
    pub original_sentence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verifying_question: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<EvidenceSet>,
    /// Equals `original_sentence` when a fallback fired.
    pub verified_statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<StepFallback>,
    /// Set when a fallback came from an error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// The greedy answer to the edited rationale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reanswer {
    /// Completion after the answer clause; empty when the call failed.
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_logprob: Option<f64>,
    /// Parsed answer; `None` means the previous top answer was kept.
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub sampling_ms: f64,
    pub editing_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// No sample could be parsed.
    Unparseable,
    /// Network, quota or timeout errors after retries.
    Transport,
    /// Any other backend or configuration error.
    Backend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFailure {
    pub kind: FailureKind,
    pub message: String,
}

impl TraceFailure {
    fn from_error(err: &EditorError) -> Self {
        let kind = match err {
            EditorError::InstanceFailed { .. } | EditorError::Prompt(_) => FailureKind::Unparseable,
            EditorError::Backend(BackendError::Transport(_) | BackendError::Quota(_)) => FailureKind::Transport,
            _ => FailureKind::Backend,
        };
        Self {
            kind,
            message: err.to_string(),
        }
    }
}

/// Everything produced while answering one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub id: String,
    pub samples: SampleSet,
    /// Raw completions that could not be parsed and were left out of `samples`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unparsed_samples: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ConsistencyReport>,
    pub edited: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<VerificationStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edited_rationale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reanswer: Option<Reanswer>,
    pub final_answer: String,
    pub usage: TokenUsage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<TraceFailure>,
}

impl PipelineTrace {
    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }

    fn failed(id: &str, err: &EditorError, usage: TokenUsage, unparsed: Vec<String>) -> Self {
        Self {
            id: id.to_string(),
            samples: SampleSet::default(),
            unparsed_samples: unparsed,
            report: None,
            edited: false,
            steps: Vec::new(),
            edited_rationale: None,
            reanswer: None,
            final_answer: String::new(),
            usage,
            timings: None,
            failure: Some(TraceFailure::from_error(err)),
        }
    }
}

/// Sampled and scored paths for one instance, before the gate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledInstance {
    pub id: String,
    pub samples: SampleSet,
    pub unparsed_samples: Vec<String>,
    pub report: ConsistencyReport,
    pub usage: TokenUsage,
    sampling_ms: f64,
}

/// The editing pass for one sampled instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EditOutcome {
    pub steps: Vec<VerificationStep>,
    pub edited_rationale: String,
    pub reanswer: Reanswer,
    pub final_answer: String,
    pub usage: TokenUsage,
    editing_ms: f64,
}

/// Sampling failed; carries what was spent before the failure.
#[derive(Debug)]
pub struct SamplingFailure {
    pub error: EditorError,
    pub usage: TokenUsage,
    pub unparsed_samples: Vec<String>,
}

impl PipelineTrace {
    pub fn from_sampling_failure(id: &str, failure: &SamplingFailure) -> Self {
        Self::failed(id, &failure.error, failure.usage, failure.unparsed_samples.clone())
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub struct Pipeline {
    backend: Arc<dyn Backend>,
    retriever: Arc<dyn Retriever>,
    templates: Arc<TemplateSet>,
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(
        backend: Arc<dyn Backend>,
        retriever: Arc<dyn Retriever>,
        templates: Arc<TemplateSet>,
        config: PipelineConfig,
    ) -> Result<Self, EditorError> {
        config.validate()?;
        for kind in TemplateKind::ALL {
            templates.get(config.task, kind)?;
        }
        Ok(Self {
            backend,
            retriever,
            templates,
            config,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    fn task(&self) -> Task {
        self.config.task
    }

    fn call(&self, request: &CompletionRequest, usage: &mut TokenUsage) -> Result<Vec<Completion>, EditorError> {
        let (completions, spent) = self.backend.complete(request)?;
        *usage += spent;
        Ok(completions)
    }

    fn greedy_line(&self, prompt: String) -> CompletionRequest {
        CompletionRequest::greedy(prompt)
            .with_stop([LINE_STOP])
            .with_max_tokens(self.config.max_tokens)
    }

    fn render(&self, kind: TemplateKind, bindings: &[(&str, &str)]) -> Result<String, EditorError> {
        Ok(prompting::render(self.templates.get(self.task(), kind)?, bindings)?)
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    /// The request that samples paths for `method`.
    pub fn sampling_request(&self, question: &str, method: Method) -> Result<CompletionRequest, EditorError> {
        let task = self.task();
        let kind = if method == Method::Standard {
            TemplateKind::Standard
        } else {
            TemplateKind::Cot
        };
        let prompt = self.render(kind, &[(task.input_placeholder(), question)])?;
        let request = match method {
            Method::Standard | Method::Cot => CompletionRequest::greedy(prompt),
            Method::CotSc | Method::VerifyEdit => {
                CompletionRequest::sampled(prompt, self.config.n_samples, self.config.sample_temperature)
            }
        };
        Ok(request
            .with_stop(task.answer_stops())
            .with_max_tokens(self.config.max_tokens))
    }

    pub fn verifying_question_request(&self, question: &str, sentence: &str) -> Result<CompletionRequest, EditorError> {
        let prompt = self.render(
            TemplateKind::VerifyingQuestion,
            &[
                (self.task().input_placeholder(), question),
                ("rationale_sentence", sentence),
            ],
        )?;
        Ok(self.greedy_line(prompt))
    }

    pub fn verifying_answer_request(
        &self,
        verifying_question: &str,
        evidence: &EvidenceSet,
    ) -> Result<CompletionRequest, EditorError> {
        let contexts = evidence.context_block(self.task().context_separator());
        let prompt = self.render(
            TemplateKind::VerifyingAnswer,
            &[("contexts", &contexts), ("verifying_question", verifying_question)],
        )?;
        Ok(self.greedy_line(prompt))
    }

    pub fn reanswer_request(&self, question: &str, edited_rationale: &str) -> Result<CompletionRequest, EditorError> {
        let task = self.task();
        let prompt = reanswer_prompt(&self.templates, task, question, edited_rationale)?;
        Ok(CompletionRequest::greedy(prompt)
            .with_stop(task.answer_stops())
            .with_max_tokens(self.config.max_tokens))
    }

    /// One greedy completion of the verifying-question prompt, cut to the
    /// first line ending in `?`.
    pub fn generate_verifying_question(
        &self,
        question: &str,
        sentence: &str,
        usage: &mut TokenUsage,
    ) -> Result<String, EditorError> {
        let request = self.verifying_question_request(question, sentence)?;
        let completions = self.call(&request, usage)?;
        let text = completions.first().map(|c| c.text.as_str()).unwrap_or("");
        Ok(extract_question(text)?)
    }

    /// One greedy completion of the verifying-answer prompt with the ranked
    /// evidence as context. `None` when there is no evidence (no call is
    /// made) or the model returned nothing.
    pub fn generate_verifying_answer(
        &self,
        verifying_question: &str,
        evidence: &EvidenceSet,
        usage: &mut TokenUsage,
    ) -> Result<Option<String>, EditorError> {
        if evidence.is_empty() {
            return Ok(None);
        }
        let request = self.verifying_answer_request(verifying_question, evidence)?;
        let completions = self.call(&request, usage)?;
        Ok(completions.first().and_then(|c| extract_statement(&c.text)))
    }

    fn path_from(&self, completion: &Completion, rationale: Rationale) -> ReasoningPath {
        ReasoningPath {
            text: completion.text.clone(),
            rationale,
            total_logprob: completion.has_logprobs().then_some(completion.total_logprob),
            token_count: completion.token_logprobs.len(),
        }
    }

    /// Draws the paths for `method` and scores them. Unparseable completions
    /// are set aside; if none parse the instance fails.
    pub fn sample(&self, instance: &Instance, method: Method) -> Result<SampledInstance, SamplingFailure> {
        let start = Instant::now();
        let mut usage = TokenUsage::default();
        let task = self.task();
        let fail = |error: EditorError, usage: TokenUsage, unparsed: Vec<String>| SamplingFailure {
            error,
            usage,
            unparsed_samples: unparsed,
        };

        let request = self
            .sampling_request(&instance.question, method)
            .map_err(|e| fail(e, usage, Vec::new()))?;
        let completions = self
            .call(&request, &mut usage)
            .map_err(|e| fail(e, usage, Vec::new()))?;

        let mut paths = Vec::new();
        let mut unparsed = Vec::new();
        for c in &completions {
            let parsed = match method {
                Method::Standard => parse_direct(task, &c.text),
                _ => parse_cot_for(task, &c.text),
            };
            match parsed {
                Ok(r) => paths.push(self.path_from(c, r)),
                Err(e) => {
                    log::debug!("{}: dropping unparseable sample: {e}", instance.id);
                    unparsed.push(c.text.clone());
                }
            }
        }
        let samples = SampleSet::new(paths);
        let report = match consistency::score(&samples, normalize_answer) {
            Ok(r) => r,
            Err(_) => {
                let err = EditorError::InstanceFailed {
                    id: instance.id.clone(),
                    attempted: completions.len(),
                };
                return Err(fail(err, usage, unparsed));
            }
        };
        Ok(SampledInstance {
            id: instance.id.clone(),
            samples,
            unparsed_samples: unparsed,
            report,
            usage,
            sampling_ms: elapsed_ms(start),
        })
    }

    fn verify_sentence(&self, instance: &Instance, sentence: &str, usage: &mut TokenUsage) -> VerificationStep {
        let mut step = VerificationStep {
            original_sentence: sentence.to_string(),
            verifying_question: None,
            evidence: None,
            verified_statement: sentence.to_string(),
            fallback: None,
            detail: None,
        };
        let fall = |step: &mut VerificationStep, why: StepFallback, err: Option<&dyn std::fmt::Display>| {
            step.fallback = Some(why);
            step.detail = err.map(|e| e.to_string());
        };

        let question = match self.generate_verifying_question(&instance.question, sentence, usage) {
            Ok(q) => q,
            Err(e @ EditorError::Prompt(_)) => {
                fall(&mut step, StepFallback::QuestionUnparseable, Some(&e));
                return step;
            }
            Err(e) => {
                fall(&mut step, StepFallback::QuestionBackendError, Some(&e));
                return step;
            }
        };
        step.verifying_question = Some(question.clone());

        let evidence = match gather_evidence(
            self.retriever.as_ref(),
            &question,
            &instance.paragraphs,
            &self.config.ranker,
        ) {
            Ok(ev) => ev,
            Err(e) => {
                fall(&mut step, StepFallback::RetrievalError, Some(&e));
                return step;
            }
        };
        let answer = self.generate_verifying_answer(&question, &evidence, usage);
        let empty_evidence = evidence.is_empty();
        step.evidence = Some(evidence);
        match answer {
            Ok(Some(statement)) => step.verified_statement = statement,
            Ok(None) if empty_evidence => fall(&mut step, StepFallback::EmptyEvidence, None),
            Ok(None) => fall(&mut step, StepFallback::EmptyAnswer, None),
            Err(e) => fall(&mut step, StepFallback::AnswerBackendError, Some(&e)),
        }
        step
    }

    /// Verifies every sentence of the representative path, rewrites the
    /// rationale and re-answers greedily.
    pub fn edit(&self, instance: &Instance, sampled: &SampledInstance) -> EditOutcome {
        let start = Instant::now();
        let mut usage = TokenUsage::default();
        let report = &sampled.report;
        let top = &sampled.samples.paths[report.top_path].rationale;

        let steps: Vec<VerificationStep> = top
            .sentences
            .iter()
            .map(|s| self.verify_sentence(instance, s, &mut usage))
            .collect();
        let verified: Vec<String> = steps.iter().map(|s| s.verified_statement.clone()).collect();
        let edited_rationale = compose_edited_rationale(top, &verified).expect("one verified statement per sentence");

        let reanswer = self.reanswer(instance, &edited_rationale, &mut usage);
        let final_answer = reanswer.answer.clone().unwrap_or_else(|| report.top_answer.clone());
        EditOutcome {
            steps,
            edited_rationale,
            reanswer,
            final_answer,
            usage,
            editing_ms: elapsed_ms(start),
        }
    }

    fn reanswer(&self, instance: &Instance, edited_rationale: &str, usage: &mut TokenUsage) -> Reanswer {
        let task = self.task();
        let failed = |text: String, mean_logprob, detail: String| Reanswer {
            text,
            mean_logprob,
            answer: None,
            detail: Some(detail),
        };
        let request = match self.reanswer_request(&instance.question, edited_rationale) {
            Ok(r) => r,
            Err(e) => return failed(String::new(), None, e.to_string()),
        };
        let completion = match self.call(&request, usage) {
            Ok(cs) => cs.into_iter().next().unwrap_or_else(|| Completion::text_only("")),
            Err(e) => return failed(String::new(), None, e.to_string()),
        };
        let mean_logprob = completion.mean_logprob();
        match parse_cot_for(task, &format!("{ANSWER_CLAUSE}{}", completion.text)) {
            Ok(r) => Reanswer {
                text: completion.text,
                mean_logprob,
                answer: Some(r.answer),
                detail: None,
            },
            Err(e) => failed(completion.text, mean_logprob, e.to_string()),
        }
    }

    /// Builds the trace from the sampled paths and, when the gate fired, the
    /// editing pass.
    pub fn assemble(&self, sampled: &SampledInstance, edit: Option<&EditOutcome>) -> PipelineTrace {
        let timings = self.config.record_timings.then(|| Timings {
            sampling_ms: sampled.sampling_ms,
            editing_ms: edit.map_or(0.0, |e| e.editing_ms),
        });
        let mut trace = PipelineTrace {
            id: sampled.id.clone(),
            samples: sampled.samples.clone(),
            unparsed_samples: sampled.unparsed_samples.clone(),
            report: Some(sampled.report.clone()),
            edited: false,
            steps: Vec::new(),
            edited_rationale: None,
            reanswer: None,
            final_answer: sampled.report.top_answer.clone(),
            usage: sampled.usage,
            timings,
            failure: None,
        };
        if let Some(e) = edit {
            trace.edited = true;
            trace.steps = e.steps.clone();
            trace.edited_rationale = Some(e.edited_rationale.clone());
            trace.reanswer = Some(e.reanswer.clone());
            trace.final_answer = e.final_answer.clone();
            trace.usage += e.usage;
        }
        trace
    }

    /// Runs `method` on one instance. Only [`Method::VerifyEdit`] consults
    /// the gate; the other methods never edit.
    pub fn run(&self, instance: &Instance, method: Method) -> PipelineTrace {
        let sampled = match self.sample(instance, method) {
            Ok(s) => s,
            Err(failure) => return PipelineTrace::from_sampling_failure(&instance.id, &failure),
        };
        let edit = (method == Method::VerifyEdit
            && consistency::should_edit_at(&sampled.report, self.config.threshold()))
        .then(|| self.edit(instance, &sampled));
        self.assemble(&sampled, edit.as_ref())
    }

    /// The full verify-and-edit procedure at the configured threshold.
    pub fn run_instance(&self, instance: &Instance) -> PipelineTrace {
        self.run(instance, Method::VerifyEdit)
    }

    /// Runs `method` over `instances` on `parallelism` workers. Traces come
    /// back in input order; `on_trace` sees each one in that order as soon as
    /// it and all earlier ones are finished.
    pub fn run_batch(
        &self,
        instances: &[Instance],
        method: Method,
        parallelism: usize,
        on_trace: impl FnMut(usize, &PipelineTrace),
    ) -> Vec<PipelineTrace> {
        crate::sync::ordered_map(instances, parallelism, |_, inst| self.run(inst, method), on_trace)
    }
}
