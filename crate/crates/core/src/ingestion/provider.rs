use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};

use crate::data::{pageview_file_name, ArticleUrl, PageviewFile};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    /// Worth retrying: network failure, throttling, server error.
    #[error("transient provider failure: {0}")]
    Transient(String),
    /// Retrying will not help: unknown article, bad request.
    #[error("provider rejected request: {0}")]
    Permanent(String),
}

/// Per-article daily view counts.
///
/// Implementations must be safe to call from several threads. Rate limiting
/// is applied by the caller.
pub trait PageviewProvider: Send + Sync {
    /// Counts for dates in `[start, end]`. Dates the service has no row for
    /// are simply absent from the result. Counts are signed so that corrupt
    /// upstream data can be detected rather than wrapped.
    fn daily_views(
        &self,
        article: &ArticleUrl,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<Vec<(NaiveDate, i64)>, ProviderError>;
}

/// Serves pageview-series files from a directory, one per article, named by
/// [`pageview_file_name`].
#[derive(Debug, Clone)]
pub struct FixturePageviewProvider {
    dir: PathBuf,
}

impl FixturePageviewProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl PageviewProvider for FixturePageviewProvider {
    fn daily_views(
        &self,
        article: &ArticleUrl,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<Vec<(NaiveDate, i64)>, ProviderError> {
        let path = self.dir.join(pageview_file_name(article));
        if !path.exists() {
            return Err(ProviderError::Permanent(format!("no pageview fixture for {article}")));
        }
        let file = PageviewFile::read(&path).map_err(|e| ProviderError::Permanent(e.to_string()))?;
        Ok(file
            .daily
            .iter()
            .map(|(&offset, &count)| (file.release_date + chrono::Duration::days(offset as i64), count as i64))
            .filter(|(date, _)| *date >= start && *date <= end)
            .collect())
    }
}

/// Live service addressed by a URL template with `{article}`, `{start}` and
/// `{end}` placeholders (dates as `YYYYMMDD`; `{project}` expands to the
/// edition host). Responses are `{"items": [{"timestamp": .., "views": ..}]}`.
pub struct HttpPageviewProvider {
    client: reqwest::blocking::Client,
    template: String,
}

impl HttpPageviewProvider {
    pub fn new(endpoint_template: &str) -> Result<Self, ProviderError> {
        for placeholder in ["{article}", "{start}", "{end}"] {
            if !endpoint_template.contains(placeholder) {
                return Err(ProviderError::Permanent(format!(
                    "endpoint_template lacks {placeholder}"
                )));
            }
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("boxcast/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| ProviderError::Permanent(e.to_string()))?;
        Ok(Self {
            client,
            template: endpoint_template.to_string(),
        })
    }

    pub fn request_url(&self, article: &ArticleUrl, start: NaiveDate, end: NaiveDate) -> String {
        self.template
            .replace("{project}", &format!("{}.wikipedia.org", article.language()))
            .replace("{article}", &utf8_percent_encode(article.title(), NON_ALPHANUMERIC).to_string())
            .replace("{start}", &start.format("%Y%m%d").to_string())
            .replace("{end}", &end.format("%Y%m%d").to_string())
    }
}

impl PageviewProvider for HttpPageviewProvider {
    fn daily_views(
        &self,
        article: &ArticleUrl,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<Vec<(NaiveDate, i64)>, ProviderError> {
        let url = self.request_url(article, start, end);
        let response = self
            .client
            .get(&url)
            .send()
            .map_err(|e| ProviderError::Transient(e.to_string()))?;
        let status = response.status();
        let body = response
            .text()
            .map_err(|e| ProviderError::Transient(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(ProviderError::Transient(format!("HTTP {status} from {url}")));
        }
        if !status.is_success() {
            return Err(ProviderError::Permanent(format!("HTTP {status} from {url}")));
        }
        parse_daily_response(&body)
    }
}

/// Parses `{"items": [{"timestamp": "2013071900", "views": 12}, ...]}`.
/// Timestamps may be `YYYYMMDD`, `YYYYMMDDHH` or `YYYY-MM-DD`.
pub fn parse_daily_response(body: &str) -> Result<Vec<(NaiveDate, i64)>, ProviderError> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| ProviderError::Transient(format!("bad response body: {e}")))?;
    let items = value
        .get("items")
        .and_then(|v| v.as_array())
        .ok_or_else(|| ProviderError::Permanent("response has no `items` array".into()))?;
    items
        .iter()
        .map(|item| {
            let ts = item
                .get("timestamp")
                .and_then(|v| v.as_str())
                .ok_or_else(|| ProviderError::Permanent("item without timestamp".into()))?;
            let views = item
                .get("views")
                .and_then(|v| v.as_i64())
                .ok_or_else(|| ProviderError::Permanent(format!("item {ts} without integer views")))?;
            Ok((parse_timestamp(ts)?, views))
        })
        .collect()
}

fn parse_timestamp(ts: &str) -> Result<NaiveDate, ProviderError> {
    let bad = || ProviderError::Permanent(format!("unparseable timestamp {ts:?}"));
    if ts.contains('-') {
        return NaiveDate::parse_from_str(ts, "%Y-%m-%d").map_err(|_| bad());
    }
    let day = ts.get(..8).ok_or_else(bad)?;
    NaiveDate::parse_from_str(day, "%Y%m%d").map_err(|_| bad())
}
