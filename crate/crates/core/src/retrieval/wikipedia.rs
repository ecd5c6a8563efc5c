use serde::{Deserialize, Serialize};

use super::{http_agent, Passage, RetrievalError, Retriever, Source};
use crate::sync::RateLimit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WikipediaConfig {
    /// MediaWiki action API endpoint.
    pub api_url: String,
    /// Pages whose lead extracts are returned.
    pub pages: usize,
    pub requests_per_second: f64,
    pub timeout_secs: u64,
}

impl Default for WikipediaConfig {
    fn default() -> Self {
        Self {
            api_url: "https://en.wikipedia.org/w/api.php".to_string(),
            pages: 2,
            requests_per_second: 5.0,
            timeout_secs: 30,
        }
    }
}

/// Searches with the full query, then fetches plain-text lead sections of
/// the top pages.
pub struct WikipediaRetriever {
    agent: ureq::Agent,
    config: WikipediaConfig,
    rate: RateLimit,
}

#[derive(Deserialize)]
struct SearchResponse {
    query: Option<SearchQuery>,
}

#[derive(Deserialize)]
struct SearchQuery {
    #[serde(default)]
    search: Vec<SearchHit>,
}

#[derive(Deserialize)]
struct SearchHit {
    title: String,
}

#[derive(Deserialize)]
struct ExtractResponse {
    query: Option<ExtractQuery>,
}

#[derive(Deserialize)]
struct ExtractQuery {
    #[serde(default)]
    pages: serde_json::Map<String, serde_json::Value>,
}

impl WikipediaRetriever {
    pub fn new(config: WikipediaConfig) -> Self {
        Self {
            agent: http_agent(config.timeout_secs),
            rate: RateLimit::per_second(config.requests_per_second),
            config,
        }
    }

    fn get_json<T: for<'de> Deserialize<'de>>(&self, params: &[(&str, &str)]) -> Result<T, RetrievalError> {
        self.rate.wait();
        let mut req = self.agent.get(&self.config.api_url);
        for (k, v) in params {
            req = req.query(*k, *v);
        }
        let unavailable = |e: ureq::Error| RetrievalError::RetrieverUnavailable(format!("wikipedia: {e}"));
        let mut resp = req.call().map_err(unavailable)?;
        resp.body_mut().read_json().map_err(unavailable)
    }

    fn search(&self, query: &str) -> Result<Vec<String>, RetrievalError> {
        let limit = self.config.pages.to_string();
        let resp: SearchResponse = self.get_json(&[
            ("action", "query"),
            ("list", "search"),
            ("srsearch", query),
            ("srlimit", &limit),
            ("format", "json"),
        ])?;
        Ok(resp
            .query
            .map(|q| q.search.into_iter().map(|h| h.title).take(self.config.pages).collect())
            .unwrap_or_default())
    }

    fn lead_extract(&self, title: &str) -> Result<Option<(String, String)>, RetrievalError> {
        let resp: ExtractResponse = self.get_json(&[
            ("action", "query"),
            ("prop", "extracts"),
            ("exintro", "1"),
            ("explaintext", "1"),
            ("redirects", "1"),
            ("titles", title),
            ("format", "json"),
        ])?;
        let page = resp.query.and_then(|q| q.pages.into_iter().next().map(|(_, v)| v));
        Ok(page.and_then(|p| {
            let extract = p.get("extract")?.as_str()?.trim().to_string();
            let title = p.get("title").and_then(|t| t.as_str()).unwrap_or(title).to_string();
            (!extract.is_empty()).then_some((title, extract))
        }))
    }
}

impl Retriever for WikipediaRetriever {
    fn retrieve(&self, query: &str, _context: &[Passage]) -> Result<Vec<Passage>, RetrievalError> {
        let mut out = Vec::new();
        for title in self.search(query)? {
            if let Some((title, text)) = self.lead_extract(&title)? {
                let rank = out.len();
                out.push(Passage::new(Source::Wikipedia, title, text, rank));
            }
        }
        Ok(out)
    }
}
