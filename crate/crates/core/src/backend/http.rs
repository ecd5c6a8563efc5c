use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::retry::{RetryPolicy, RetryableFailure};
use super::{Backend, BackendError, Completion, CompletionRequest, TokenUsage};
use crate::sync::InFlightLimit;

/// Environment variable holding the completion endpoint credential.
pub const API_KEY_ENV: &str = "VECOT_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpBackendConfig {
    /// Base URL; requests go to `{base_url}/completions`.
    pub base_url: String,
    pub model: String,
    pub max_in_flight: usize,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".to_string(),
            model: "text-davinci-003".to_string(),
            max_in_flight: 8,
            timeout_secs: 120,
            retry: RetryPolicy::default(),
        }
    }
}

/// OpenAI-compatible text completion client.
pub struct HttpBackend {
    agent: ureq::Agent,
    config: HttpBackendConfig,
    api_key: Option<String>,
    in_flight: InFlightLimit,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    n: usize,
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    stop: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    logprobs: Option<u32>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<TokenUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    #[serde(default)]
    index: usize,
    text: String,
    #[serde(default)]
    logprobs: Option<WireLogprobs>,
}

#[derive(Deserialize)]
struct WireLogprobs {
    #[serde(default)]
    token_logprobs: Vec<Option<f64>>,
}

impl HttpBackend {
    /// Reads the credential from `VECOT_API_KEY`.
    pub fn from_env(config: HttpBackendConfig) -> Result<Self, BackendError> {
        let key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or(BackendError::MissingCredential(API_KEY_ENV))?;
        Ok(Self::new(config, Some(key)))
    }

    pub fn new(config: HttpBackendConfig, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        let in_flight = InFlightLimit::new(config.max_in_flight);
        Self {
            agent,
            config,
            api_key,
            in_flight,
        }
    }

    fn endpoint(&self) -> String {
        format!("{}/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, request: &CompletionRequest) -> Result<(Vec<Completion>, TokenUsage), RetryableFailure> {
        let body = WireRequest {
            model: &self.config.model,
            prompt: &request.prompt,
            n: request.n_samples,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
            stop: &request.stop_sequences,
            logprobs: request.want_logprobs.then_some(1),
        };
        let mut req = self.agent.post(&self.endpoint());
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = {
            let _permit = self.in_flight.acquire();
            req.send_json(&body)
                .map_err(|e| BackendError::Transport(e.to_string()))?
        };
        let status = response.status().as_u16();
        if status == 429 {
            let retry_after = response
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(RetryableFailure {
                error: BackendError::Quota(format!("HTTP 429 from {}", self.endpoint())),
                retry_after,
            });
        }
        if status == 408 || status >= 500 {
            return Err(BackendError::Transport(format!("HTTP {status} from {}", self.endpoint())).into());
        }
        if !(200..300).contains(&status) {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            return Err(BackendError::Rejected { status, body }.into());
        }
        let wire: WireResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Malformed(e.to_string()))?;
        Ok(convert(wire, request)?)
    }
}

fn convert(mut wire: WireResponse, request: &CompletionRequest) -> Result<(Vec<Completion>, TokenUsage), BackendError> {
    if wire.choices.len() != request.n_samples {
        return Err(BackendError::Malformed(format!(
            "expected {} choices, got {}",
            request.n_samples,
            wire.choices.len()
        )));
    }
    wire.choices.sort_by_key(|c| c.index);
    let completions = wire
        .choices
        .into_iter()
        .map(|choice| {
            // The first token of some responses carries a null logprob.
            let logprobs = choice
                .logprobs
                .map(|lp| lp.token_logprobs.into_iter().flatten().collect())
                .unwrap_or_default();
            let mut c = Completion::new(choice.text, logprobs);
            c.truncate_at_stop(&request.stop_sequences);
            c
        })
        .collect();
    Ok((completions, wire.usage.unwrap_or_default()))
}

impl Backend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<(Vec<Completion>, TokenUsage), BackendError> {
        request.validate()?;
        self.config.retry.run(|| self.attempt(request))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converts_wire_response() {
        let wire: WireResponse = serde_json::from_str(
            r#"{"choices":[
                {"index":1,"text":" b","logprobs":{"token_logprobs":[-0.5,-0.5]}},
                {"index":0,"text":" a\n\nQ: next","logprobs":{"token_logprobs":[null,-0.1]}}],
               "usage":{"prompt_tokens":12,"completion_tokens":4,"total_tokens":16}}"#,
        )
        .unwrap();
        let req = CompletionRequest::sampled("p", 2, 0.7).with_stop(["\n\nQ:"]);
        let (cs, usage) = convert(wire, &req).unwrap();
        assert_eq!(cs[0].text, " a");
        assert_eq!(cs[0].token_logprobs, vec![-0.1]);
        assert_eq!(cs[1].text, " b");
        assert!((cs[1].total_logprob + 1.0).abs() < 1e-12);
        assert_eq!(usage, TokenUsage::new(12, 4));
    }

    #[test]
    fn wrong_choice_count_is_malformed() {
        let wire: WireResponse = serde_json::from_str(r#"{"choices":[{"text":"a"}]}"#).unwrap();
        let req = CompletionRequest::sampled("p", 2, 0.7);
        assert!(matches!(convert(wire, &req), Err(BackendError::Malformed(_))));
    }
}
