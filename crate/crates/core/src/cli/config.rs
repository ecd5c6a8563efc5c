use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::backend::{HttpBackendConfig, DEFAULT_MAX_TOKENS};
use crate::eval::CostModel;
use crate::prompting::Task;
use crate::retrieval::{RankerConfig, Source, WebSearchConfig, WikipediaConfig};

/// The run configuration file. Every section and key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub backend: HttpBackendConfig,
    pub sampling: SamplingSection,
    pub editing: EditingSection,
    pub retrieval: RetrievalSection,
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub n_samples: usize,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            n_samples: 5,
            temperature: 0.7,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EditingSection {
    /// `None` means `ceil(n_samples / 2)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalSection {
    pub source: Source,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    pub ranker: RankerConfig,
    pub wikipedia: WikipediaConfig,
    pub websearch: WebSearchConfig,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        Self {
            source: Source::Wikipedia,
            corpus: None,
            ranker: RankerConfig::default(),
            wikipedia: WikipediaConfig::default(),
            websearch: WebSearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompts_dir: Option<PathBuf>,
    pub cost: CostModel,
    pub parallel: usize,
    pub seed: u64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            task: None,
            dataset: None,
            index: None,
            prompts_dir: None,
            cost: CostModel::default(),
            parallel: 4,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn task(&self) -> Result<Task, CliError> {
        self.eval
            .task
            .ok_or_else(|| CliError::Config("--task is required".into()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.eval.parallel == 0 {
            return Err(CliError::Config("parallel must be at least 1".into()));
        }
        self.eval.cost.validate()?;
        if self.retrieval.source == Source::Dataset && self.eval.task == Some(Task::Fever) {
            return Err(CliError::Config(
                "fever instances carry no paragraphs; pick another retriever".into(),
            ));
        }
        Ok(())
    }
}
