use std::sync::Arc;

use super::{EditorError, Method, Pipeline, PipelineConfig};
use crate::backend::{Completion, FixtureMode, ScriptedBackend, ScriptedFixture, TokenUsage};
use crate::eval::Instance;
use crate::prompting::TemplateSet;
use crate::retrieval::{gather_evidence, EvidenceSet, Retriever};

/// Builds a scripted fixture for a pipeline configuration by computing the
/// exact requests the pipeline will make and attaching canned replies.
pub struct ScriptBuilder {
    planner: Pipeline,
    retriever: Arc<dyn Retriever>,
    fixture: ScriptedFixture,
}

impl ScriptBuilder {
    pub fn new(
        templates: Arc<TemplateSet>,
        config: PipelineConfig,
        retriever: Arc<dyn Retriever>,
    ) -> Result<Self, EditorError> {
        let unused = Arc::new(ScriptedBackend::new(ScriptedFixture::new(FixtureMode::Strict)));
        Ok(Self {
            planner: Pipeline::new(unused, retriever.clone(), templates, config)?,
            retriever,
            fixture: ScriptedFixture::new(FixtureMode::Strict),
        })
    }

    /// Replies to the sampling request for `method`.
    pub fn samples(
        &mut self,
        instance: &Instance,
        method: Method,
        completions: &[Completion],
        usage: TokenUsage,
    ) -> Result<&mut Self, EditorError> {
        let req = self.planner.sampling_request(&instance.question, method)?;
        self.fixture.insert(&req, completions, usage);
        Ok(self)
    }

    pub fn verifying_question(
        &mut self,
        instance: &Instance,
        sentence: &str,
        reply: &str,
        usage: TokenUsage,
    ) -> Result<&mut Self, EditorError> {
        let req = self.planner.verifying_question_request(&instance.question, sentence)?;
        self.fixture.insert_texts(&req, &[reply], usage);
        Ok(self)
    }

    /// Retrieves for `verifying_question` exactly as the pipeline will and
    /// scripts the reply to the resulting verifying-answer prompt. Returns
    /// the evidence so callers can check it.
    pub fn verifying_answer(
        &mut self,
        instance: &Instance,
        verifying_question: &str,
        reply: &str,
        usage: TokenUsage,
    ) -> Result<EvidenceSet, EditorError> {
        let evidence = gather_evidence(
            self.retriever.as_ref(),
            verifying_question,
            &instance.paragraphs,
            &self.planner.config().ranker,
        )?;
        let req = self.planner.verifying_answer_request(verifying_question, &evidence)?;
        self.fixture.insert_texts(&req, &[reply], usage);
        Ok(evidence)
    }

    pub fn reanswer(
        &mut self,
        instance: &Instance,
        edited_rationale: &str,
        reply: Completion,
        usage: TokenUsage,
    ) -> Result<&mut Self, EditorError> {
        let req = self.planner.reanswer_request(&instance.question, edited_rationale)?;
        self.fixture.insert(&req, &[reply], usage);
        Ok(self)
    }

    pub fn fixture(&self) -> &ScriptedFixture {
        &self.fixture
    }

    pub fn finish(self) -> ScriptedFixture {
        self.fixture
    }
}
