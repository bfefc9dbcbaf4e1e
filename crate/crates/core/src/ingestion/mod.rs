//! Daily pageview download with caching, retries and rate limiting.

mod cache;
mod provider;
mod rate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::{AlignedFilm, ArticleUrl, Dataset, FilmKey, FilmRecord, Manifest, OffsetRange, PageviewSeries};

pub use cache::{write_atomic, CacheError, CacheMeta, CacheStore, CachedDays};
pub use provider::{parse_daily_response, FixturePageviewProvider, HttpPageviewProvider, PageviewProvider, ProviderError};
pub use rate::{Permit, RateLimiter};

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("invalid fetch request: {0}")]
    Request(String),
    #[error("fetching {article} failed after {attempts} attempt(s): {diagnostic}")]
    Exhausted {
        article: ArticleUrl,
        attempts: u32,
        diagnostic: String,
    },
    #[error("fetching {article} failed permanently: {diagnostic}")]
    Permanent { article: ArticleUrl, diagnostic: String },
    #[error("provider returned negative count {count} for {article} on {date}")]
    NegativeCount {
        article: ArticleUrl,
        date: NaiveDate,
        count: i64,
    },
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("no film could be fetched ({} attempted)", report.films.len())]
    EmptyDataset { report: FetchReport },
}

impl FetchError {
    /// Errors caused by the data source rather than by the request or local I/O.
    pub fn is_provider_failure(&self) -> bool {
        matches!(self, FetchError::Exhausted { .. } | FetchError::Permanent { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Wait before the second attempt; doubled for each one after.
    pub backoff: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderPolicy {
    pub max_concurrent: usize,
    pub min_request_interval: Duration,
    pub retry: RetryPolicy,
}

impl Default for ProviderPolicy {
    fn default() -> Self {
        Self {
            max_concurrent: 4,
            min_request_interval: Duration::from_millis(100),
            retry: RetryPolicy {
                max_attempts: 3,
                backoff: Duration::from_millis(500),
            },
        }
    }
}

impl ProviderPolicy {
    pub fn check(&self) -> Result<(), FetchError> {
        if self.max_concurrent == 0 {
            return Err(FetchError::Request("max_concurrent must be positive".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(FetchError::Request("max_attempts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn limiter(&self) -> RateLimiter {
        RateLimiter::new(self.min_request_interval, self.max_concurrent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRequest {
    pub article_url: ArticleUrl,
    pub release_date: NaiveDate,
    pub offsets: OffsetRange,
}

impl FetchRequest {
    pub fn new(article_url: ArticleUrl, release_date: NaiveDate, offsets: OffsetRange) -> Result<Self, FetchError> {
        if offsets.end > 0 {
            return Err(FetchError::Request(format!(
                "window {offsets} extends past release day"
            )));
        }
        Ok(Self {
            article_url,
            release_date,
            offsets,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchedSeries {
    pub series: PageviewSeries,
    /// Days in the window the provider had no row for, stored as zero.
    pub filled_days: usize,
    /// Provider attempts it took to obtain the data. For a cache hit these
    /// are the attempts recorded when the data was downloaded.
    pub attempts: u32,
    pub cache_hit: bool,
}

/// Fetches one article's window, consulting the cache first.
pub fn fetch_series(
    req: &FetchRequest,
    provider: &dyn PageviewProvider,
    policy: &ProviderPolicy,
    cache: &CacheStore,
) -> Result<FetchedSeries, FetchError> {
    policy.check()?;
    fetch_with_limiter(req, provider, policy, cache, &policy.limiter())
}

fn fetch_with_limiter(
    req: &FetchRequest,
    provider: &dyn PageviewProvider,
    policy: &ProviderPolicy,
    cache: &CacheStore,
    limiter: &RateLimiter,
) -> Result<FetchedSeries, FetchError> {
    let cached = cache.load(&req.article_url)?;
    if let Some((series, filled_days)) = cached.series(&req.article_url, req.release_date, req.offsets) {
        log::debug!("cache hit for {}", req.article_url);
        return Ok(FetchedSeries {
            series,
            filled_days,
            attempts: cached.attempts,
            cache_hit: true,
        });
    }

    // Fetch only the span of days the cache lacks.
    let missing = cached.missing(req.release_date, req.offsets);
    let (start, end) = (missing[0], missing[missing.len() - 1]);
    let (rows, attempts) = call_with_retry(req, provider, policy, limiter, start, end)?;

    let mut counts = BTreeMap::new();
    for (date, count) in rows {
        if date < start || date > end {
            continue;
        }
        if count < 0 {
            return Err(FetchError::NegativeCount {
                article: req.article_url.clone(),
                date,
                count,
            });
        }
        counts.insert(date, count as u64);
    }
    let mut filled = BTreeSet::new();
    let mut date = start;
    while date <= end {
        counts.entry(date).or_insert_with(|| {
            filled.insert(date);
            0
        });
        date = date.succ_opt().expect("date in range");
    }
    cache.store(&req.article_url, req.release_date, &counts, &filled, attempts)?;

    let mut merged = cached;
    merged.counts.extend(counts);
    merged.filled.extend(filled);
    let (series, filled_days) = merged
        .series(&req.article_url, req.release_date, req.offsets)
        .expect("every day of the window is now present");
    Ok(FetchedSeries {
        series,
        filled_days,
        attempts,
        cache_hit: false,
    })
}

fn call_with_retry(
    req: &FetchRequest,
    provider: &dyn PageviewProvider,
    policy: &ProviderPolicy,
    limiter: &RateLimiter,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<(Vec<(NaiveDate, i64)>, u32), FetchError> {
    let mut backoff = policy.retry.backoff;
    let mut attempt = 0;
    loop {
        attempt += 1;
        let result = {
            let _permit = limiter.acquire();
            provider.daily_views(&req.article_url, start, end)
        };
        match result {
            Ok(rows) => return Ok((rows, attempt)),
            Err(ProviderError::Permanent(diagnostic)) => {
                return Err(FetchError::Permanent {
                    article: req.article_url.clone(),
                    diagnostic,
                })
            }
            Err(ProviderError::Transient(diagnostic)) => {
                if attempt >= policy.retry.max_attempts {
                    return Err(FetchError::Exhausted {
                        article: req.article_url.clone(),
                        attempts: attempt,
                        diagnostic,
                    });
                }
                log::warn!("{}: {diagnostic}; retrying in {backoff:?}", req.article_url);
                std::thread::sleep(backoff);
                backoff = backoff.saturating_mul(2);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FetchStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilmFetch {
    pub article_url: ArticleUrl,
    pub status: FetchStatus,
    pub attempts: u32,
    pub filled_days: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchReport {
    pub films: Vec<FilmFetch>,
}

impl FetchReport {
    pub fn failures(&self) -> impl Iterator<Item = &FilmFetch> {
        self.films.iter().filter(|f| f.status == FetchStatus::Failed)
    }

    pub fn filled_days(&self) -> usize {
        self.films.iter().map(|f| f.filled_days).sum()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Downloads the window `[manifest.window_start, 0]` for every manifest
/// entry. `records` supplies revenue and screens for each catalog key.
pub fn fetch_dataset(
    manifest: &Manifest,
    records: &[FilmRecord],
    provider: &dyn PageviewProvider,
    policy: &ProviderPolicy,
    cache: &CacheStore,
) -> Result<(Dataset, FetchReport), FetchError> {
    policy.check()?;
    manifest.check().map_err(FetchError::Request)?;
    let window = OffsetRange::new(manifest.window_start, 0)
        .ok_or_else(|| FetchError::Request(format!("window_start {} is after release", manifest.window_start)))?;
    let by_key: HashMap<FilmKey, &FilmRecord> = records.iter().map(|r| (r.key(), r)).collect();

    let limiter = policy.limiter();
    let next = AtomicUsize::new(0);
    let outcomes: Mutex<Vec<Option<Result<FetchedSeries, String>>>> =
        Mutex::new(vec![None; manifest.entries.len()]);
    let workers = policy.max_concurrent.min(manifest.entries.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(entry) = manifest.entries.get(i) else { break };
                let outcome = match by_key.get(&entry.catalog_key) {
                    None => Err(format!("catalog has no film {}", entry.catalog_key)),
                    Some(record) => FetchRequest::new(entry.article_url.clone(), record.release_date, window)
                        .and_then(|req| fetch_with_limiter(&req, provider, policy, cache, &limiter))
                        .map_err(|e| e.to_string()),
                };
                outcomes.lock().expect("outcome lock")[i] = Some(outcome);
            });
        }
    });

    let mut report = FetchReport::default();
    let mut films = Vec::new();
    for (entry, outcome) in manifest.entries.iter().zip(outcomes.into_inner().expect("outcome lock")) {
        match outcome.expect("every entry visited") {
            Ok(fetched) => {
                report.films.push(FilmFetch {
                    article_url: entry.article_url.clone(),
                    status: FetchStatus::Ok,
                    attempts: fetched.attempts,
                    filled_days: fetched.filled_days,
                    reason: None,
                });
                films.push(AlignedFilm {
                    record: by_key[&entry.catalog_key].clone(),
                    article_url: entry.article_url.clone(),
                    views: fetched.series,
                    alignment_method: entry.alignment_method,
                });
            }
            Err(reason) => {
                log::warn!("excluding {}: {reason}", entry.catalog_key);
                report.films.push(FilmFetch {
                    article_url: entry.article_url.clone(),
                    status: FetchStatus::Failed,
                    attempts: 0,
                    filled_days: 0,
                    reason: Some(reason),
                });
            }
        }
    }
    if films.is_empty() {
        return Err(FetchError::EmptyDataset { report });
    }
    Ok((
        Dataset {
            market: manifest.market,
            films,
            window_start: manifest.window_start,
        },
        report,
    ))
}

/// Builds the dataset from the cache alone. Any film whose window is not
/// fully cached is an error.
pub fn load_dataset(manifest: &Manifest, records: &[FilmRecord], cache: &CacheStore) -> Result<Dataset, FetchError> {
    struct Offline;
    impl PageviewProvider for Offline {
        fn daily_views(&self, a: &ArticleUrl, _: NaiveDate, _: NaiveDate) -> Result<Vec<(NaiveDate, i64)>, ProviderError> {
            Err(ProviderError::Permanent(format!("{a} is not cached")))
        }
    }
    let policy = ProviderPolicy {
        max_concurrent: 1,
        min_request_interval: Duration::ZERO,
        retry: RetryPolicy {
            max_attempts: 1,
            backoff: Duration::ZERO,
        },
    };
    let (dataset, report) = fetch_dataset(manifest, records, &Offline, &policy, cache)?;
    if let Some(missing) = report.failures().next() {
        return Err(FetchError::Permanent {
            article: missing.article_url.clone(),
            diagnostic: missing.reason.clone().unwrap_or_default(),
        });
    }
    Ok(dataset)
}
