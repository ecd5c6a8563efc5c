//! Verify-and-edit chain-of-thought reasoning.
//!
//! The pipeline samples several chain-of-thought completions from a
//! completion-style language model, scores their agreement, and sends the
//! uncertain ones through a verification pass: every rationale sentence is
//! turned into a verifying question, evidence is retrieved and ranked, the
//! model answers the question from that evidence, and the rewritten
//! rationale is fed back to produce a new answer.
//!
//! Module map:
//!
//! - [`backend`]: completion endpoint access, scripted fixtures, record/replay.
//! - [`prompting`]: few-shot templates and chain-of-thought parsing.
//! - [`consistency`]: answer grouping, self-consistency scores, the edit gate.
//! - [`retrieval`]: knowledge sources and top-k sentence ranking.
//! - [`editor`]: the per-instance pipeline, baselines and batch execution.
//! - [`eval`]: datasets, metrics, cost, plot-data exports and subsampling.
//! - [`cli`]: the `vecot` command line.
//! - [`demo`]: scripted scenarios used by the examples and tests.

pub mod backend;
pub mod cli;
pub mod consistency;
pub mod demo;
pub mod editor;
pub mod eval;
pub mod prompting;
pub mod retrieval;
mod sync;

pub use backend::{Backend, Completion, CompletionRequest, TokenUsage};
pub use consistency::{normalize_answer, ConsistencyReport, ReasoningPath, SampleSet};
pub use editor::{Pipeline, PipelineConfig, PipelineTrace};
pub use eval::Instance;
pub use prompting::{Task, TemplateKind, TemplateSet};
pub use retrieval::{EvidenceSet, Passage, RankerConfig, Retriever};
