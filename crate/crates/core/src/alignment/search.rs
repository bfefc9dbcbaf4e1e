use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use crate::data::WikiLanguage;
use crate::ingestion::RateLimiter;

use super::normalize::query_key;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    /// Network or server trouble; the same query may succeed later.
    #[error("search transport failure: {0}")]
    Transport(String),
    #[error("search quota exhausted: {0}")]
    Quota(String),
}

impl SearchError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, SearchError::Transport(_))
    }
}

/// Ranked web search restricted to one encyclopedia edition.
///
/// Implementations must be callable from several threads at once and do
/// their own rate limiting.
pub trait SearchProvider: Send + Sync {
    /// Raw result links, best first.
    fn search(&self, query: &str, site: WikiLanguage) -> Result<Vec<String>, SearchError>;
}

/// Canned results keyed by [`query_key`], e.g. `gravity+映画`.
#[derive(Debug, Clone, Default)]
pub struct FixtureSearchProvider {
    results: HashMap<String, Vec<String>>,
}

impl FixtureSearchProvider {
    pub fn new(results: HashMap<String, Vec<String>>) -> Self {
        Self { results }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text).map(Self::new)
    }

    pub fn from_path(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

impl SearchProvider for FixtureSearchProvider {
    fn search(&self, query: &str, site: WikiLanguage) -> Result<Vec<String>, SearchError> {
        Ok(self
            .results
            .get(&query_key(query, site))
            .cloned()
            .unwrap_or_default())
    }
}

/// Custom-search style JSON API: `GET endpoint?key=..&cx=..&q=..&siteSearch=<host>`
/// answering `{"items": [{"link": ...}, ...]}`.
pub struct HttpSearchProvider {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: String,
    engine_id: String,
    limiter: RateLimiter,
}

impl HttpSearchProvider {
    pub fn new(
        endpoint: &str,
        api_key: &str,
        engine_id: &str,
        min_request_interval: Duration,
    ) -> Result<Self, SearchError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| SearchError::Transport(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: endpoint.to_string(),
            api_key: api_key.to_string(),
            engine_id: engine_id.to_string(),
            limiter: RateLimiter::new(min_request_interval, 1),
        })
    }
}

impl SearchProvider for HttpSearchProvider {
    fn search(&self, query: &str, site: WikiLanguage) -> Result<Vec<String>, SearchError> {
        let _permit = self.limiter.acquire();
        let host = site.wiki_host();
        let response = self
            .client
            .get(&self.endpoint)
            .query(&[
                ("key", self.api_key.as_str()),
                ("cx", self.engine_id.as_str()),
                ("q", query),
                ("siteSearch", host.as_str()),
                ("siteSearchFilter", "i"),
            ])
            .send()
            .map_err(|e| SearchError::Transport(e.to_string()))?;
        let status = response.status();
        let body = response
            .text()
            .map_err(|e| SearchError::Transport(e.to_string()))?;
        if status.as_u16() == 429 || (status.as_u16() == 403 && is_quota_body(&body)) {
            return Err(SearchError::Quota(format!("HTTP {status}: {}", truncate(&body))));
        }
        if !status.is_success() {
            return Err(SearchError::Transport(format!("HTTP {status}: {}", truncate(&body))));
        }
        parse_search_response(&body)
    }
}

fn is_quota_body(body: &str) -> bool {
    ["quotaExceeded", "dailyLimitExceeded", "rateLimitExceeded", "RESOURCE_EXHAUSTED"]
        .iter()
        .any(|marker| body.contains(marker))
}

fn truncate(body: &str) -> String {
    body.chars().take(200).collect()
}

/// Extracts `items[].link`; a response without `items` means no results.
pub fn parse_search_response(body: &str) -> Result<Vec<String>, SearchError> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| SearchError::Transport(format!("bad search response: {e}")))?;
    Ok(value
        .get("items")
        .and_then(|items| items.as_array())
        .map(|items| {
            items
                .iter()
                .filter_map(|item| item.get("link").and_then(|l| l.as_str()).map(str::to_string))
                .collect()
        })
        .unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_lookup_uses_query_key() {
        let provider = FixtureSearchProvider::from_json(
            r#"{"gravity+映画": ["https://ja.wikipedia.org/wiki/ゼロ・グラビティ"]}"#,
        )
        .unwrap();
        assert_eq!(
            provider.search("Gravity 映画", WikiLanguage::Ja).unwrap(),
            vec!["https://ja.wikipedia.org/wiki/ゼロ・グラビティ"]
        );
        assert!(provider.search("Unknown 映画", WikiLanguage::Ja).unwrap().is_empty());
    }

    #[test]
    fn parses_items_and_missing_items() {
        let body = r#"{"items":[{"link":"https://en.wikipedia.org/wiki/A"},{"title":"no link"},{"link":"https://en.wikipedia.org/wiki/B"}]}"#;
        assert_eq!(parse_search_response(body).unwrap().len(), 2);
        assert!(parse_search_response(r#"{"searchInformation":{}}"#).unwrap().is_empty());
        assert!(parse_search_response("<html>").unwrap_err().is_retriable());
    }

    #[test]
    fn quota_markers() {
        assert!(is_quota_body(r#"{"error":{"errors":[{"reason":"dailyLimitExceeded"}]}}"#));
        assert!(!is_quota_body(r#"{"error":{"errors":[{"reason":"keyInvalid"}]}}"#));
        assert!(!SearchError::Quota("x".into()).is_retriable());
    }
}
