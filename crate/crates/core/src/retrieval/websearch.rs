use serde::{Deserialize, Serialize};

use super::{http_agent, Passage, RetrievalError, Retriever, Source};
use crate::sync::RateLimit;

/// Environment variable substituted for `{key}` in the URL template.
pub const SEARCH_KEY_ENV: &str = "VECOT_SEARCH_KEY";

/// Generic SERP-style JSON search adapter.
///
/// `url_template` may contain `{query}` (URL-encoded verifying question)
/// and `{key}`. `results_json_path` is a dot path to the result array, with
/// numeric segments indexing arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WebSearchConfig {
    pub url_template: String,
    pub results_json_path: String,
    pub title_field: String,
    pub snippet_field: String,
    pub max_results: usize,
    pub requests_per_second: f64,
    pub timeout_secs: u64,
}

impl Default for WebSearchConfig {
    fn default() -> Self {
        Self {
            url_template: "https://serpapi.com/search.json?engine=google&q={query}&api_key={key}".to_string(),
            results_json_path: "organic_results".to_string(),
            title_field: "title".to_string(),
            snippet_field: "snippet".to_string(),
            max_results: 5,
            requests_per_second: 2.0,
            timeout_secs: 30,
        }
    }
}

pub struct WebSearchRetriever {
    agent: ureq::Agent,
    config: WebSearchConfig,
    key: String,
    rate: RateLimit,
}

fn encode(s: &str) -> String {
    url::form_urlencoded::byte_serialize(s.as_bytes()).collect()
}

fn lookup<'a>(root: &'a serde_json::Value, path: &str) -> Option<&'a serde_json::Value> {
    path.split('.')
        .filter(|seg| !seg.is_empty())
        .try_fold(root, |node, seg| match seg.parse::<usize>() {
            Ok(i) if node.is_array() => node.get(i),
            _ => node.get(seg),
        })
}

impl WebSearchRetriever {
    /// Reads the API key from `VECOT_SEARCH_KEY` when the template uses `{key}`.
    pub fn from_env(config: WebSearchConfig) -> Result<Self, RetrievalError> {
        let key = std::env::var(SEARCH_KEY_ENV).unwrap_or_default();
        if config.url_template.contains("{key}") && key.trim().is_empty() {
            return Err(RetrievalError::Config(format!(
                "web search template needs {{key}} but {SEARCH_KEY_ENV} is not set"
            )));
        }
        Ok(Self::new(config, key))
    }

    pub fn new(config: WebSearchConfig, key: impl Into<String>) -> Self {
        Self {
            agent: http_agent(config.timeout_secs),
            rate: RateLimit::per_second(config.requests_per_second),
            config,
            key: key.into(),
        }
    }

    fn url_for(&self, query: &str) -> String {
        self.config
            .url_template
            .replace("{query}", &encode(query))
            .replace("{key}", &encode(&self.key))
    }

    /// Extracts `(title, snippet)` passages from a SERP JSON document.
    pub fn parse_results(&self, body: &serde_json::Value) -> Vec<Passage> {
        let Some(results) = lookup(body, &self.config.results_json_path).and_then(|v| v.as_array()) else {
            return Vec::new();
        };
        results
            .iter()
            .filter_map(|r| {
                let snippet = lookup(r, &self.config.snippet_field)?.as_str()?.trim();
                let title = lookup(r, &self.config.title_field)
                    .and_then(|t| t.as_str())
                    .unwrap_or("");
                (!snippet.is_empty()).then(|| (title.to_string(), snippet.to_string()))
            })
            .take(self.config.max_results)
            .enumerate()
            .map(|(rank, (title, snippet))| Passage::new(Source::WebSearch, title, snippet, rank))
            .collect()
    }
}

impl Retriever for WebSearchRetriever {
    fn retrieve(&self, query: &str, _context: &[Passage]) -> Result<Vec<Passage>, RetrievalError> {
        self.rate.wait();
        let unavailable = |e: ureq::Error| RetrievalError::RetrieverUnavailable(format!("web search: {e}"));
        let mut resp = self.agent.get(&self.url_for(query)).call().map_err(unavailable)?;
        let body: serde_json::Value = resp.body_mut().read_json().map_err(unavailable)?;
        Ok(self.parse_results(&body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_template_encodes() {
        let r = WebSearchRetriever::new(
            WebSearchConfig {
                url_template: "http://h/s?q={query}&k={key}".into(),
                ..Default::default()
            },
            "a&b",
        );
        assert_eq!(
            r.url_for("What team did John Nyskohus play for?"),
            "http://h/s?q=What+team+did+John+Nyskohus+play+for%3F&k=a%26b"
        );
    }

    #[test]
    fn parses_nested_results() {
        let r = WebSearchRetriever::new(
            WebSearchConfig {
                results_json_path: "data.web.results".into(),
                snippet_field: "body.text".into(),
                max_results: 2,
                ..Default::default()
            },
            "",
        );
        let body = serde_json::json!({"data": {"web": {"results": [
            {"title": "A", "body": {"text": "first snippet"}},
            {"title": "B", "body": {"text": "  "}},
            {"body": {"text": "third snippet"}},
            {"title": "D", "body": {"text": "fourth"}}
        ]}}});
        let got = r.parse_results(&body);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].title, "A");
        assert_eq!(got[1].text, "third snippet");
        assert_eq!(got[1].rank, 1);
        assert!(r.parse_results(&serde_json::json!({"nothing": 1})).is_empty());
    }

    #[test]
    fn lookup_indexes_arrays() {
        let v = serde_json::json!({"a": [{"b": 1}, {"b": 2}]});
        assert_eq!(lookup(&v, "a.1.b"), Some(&serde_json::json!(2)));
        assert_eq!(lookup(&v, "a.5.b"), None);
    }
}
