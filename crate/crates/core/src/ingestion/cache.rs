//! Directory of pageview-series files keyed by article, with a metadata
//! sidecar per article. Lookups are per day, so overlapping windows from
//! different runs (or markets with different release dates) share data.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::data::{pageview_file_name, ArticleUrl, OffsetRange, PageviewFile, PageviewSeries};

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt cache entry {path}: {message}")]
    Corrupt { path: String, message: String },
}

/// Sidecar describing what the series file holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheMeta {
    pub article_url: ArticleUrl,
    pub release_date: NaiveDate,
    /// Offset span of the stored days relative to `release_date`.
    pub coverage: OffsetRange,
    pub days: usize,
    /// Dates the provider had no row for; stored as zero.
    pub filled_dates: BTreeSet<NaiveDate>,
    /// Provider attempts taken by the most recent download.
    #[serde(default)]
    pub attempts: u32,
}

/// Cached counts of one article by calendar date.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CachedDays {
    pub counts: BTreeMap<NaiveDate, u64>,
    pub filled: BTreeSet<NaiveDate>,
    /// Provider attempts taken by the most recent download.
    pub attempts: u32,
    release_date: Option<NaiveDate>,
}

impl CachedDays {
    pub fn missing(&self, release_date: NaiveDate, range: OffsetRange) -> Vec<NaiveDate> {
        range
            .iter()
            .map(|o| release_date + Duration::days(o as i64))
            .filter(|d| !self.counts.contains_key(d))
            .collect()
    }

    /// Series for a film released on `release_date` over `range`, with the
    /// number of zero-filled days inside it. `None` if any day is missing.
    pub fn series(
        &self,
        article: &ArticleUrl,
        release_date: NaiveDate,
        range: OffsetRange,
    ) -> Option<(PageviewSeries, usize)> {
        let mut daily = BTreeMap::new();
        let mut filled = 0;
        for offset in range.iter() {
            let date = release_date + Duration::days(offset as i64);
            daily.insert(offset, *self.counts.get(&date)?);
            if self.filled.contains(&date) {
                filled += 1;
            }
        }
        let series = PageviewSeries::new(article.clone(), release_date, range, daily).expect("offsets within range");
        Some((series, filled))
    }
}

#[derive(Debug)]
pub struct CacheStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl CacheStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| CacheError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn series_path(&self, article: &ArticleUrl) -> PathBuf {
        self.dir.join(pageview_file_name(article))
    }

    pub fn meta_path(&self, article: &ArticleUrl) -> PathBuf {
        let name = pageview_file_name(article);
        self.dir.join(name.replace(".json", ".meta.json"))
    }

    pub fn load(&self, article: &ArticleUrl) -> Result<CachedDays, CacheError> {
        let path = self.series_path(article);
        if !path.exists() {
            return Ok(CachedDays::default());
        }
        let corrupt = |message: String| CacheError::Corrupt {
            path: path.display().to_string(),
            message,
        };
        let file = PageviewFile::read(&path).map_err(|e| corrupt(e.to_string()))?;
        if &file.article_url != article {
            return Err(corrupt(format!("holds {} not {article}", file.article_url)));
        }
        let meta_path = self.meta_path(article);
        let (filled, attempts) = if meta_path.exists() {
            let text = std::fs::read_to_string(&meta_path).map_err(|source| CacheError::Io {
                path: meta_path.display().to_string(),
                source,
            })?;
            let meta: CacheMeta = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
            (meta.filled_dates, meta.attempts)
        } else {
            (BTreeSet::new(), 0)
        };
        let counts = file
            .daily
            .iter()
            .map(|(&o, &c)| (file.release_date + Duration::days(o as i64), c))
            .collect();
        Ok(CachedDays {
            counts,
            filled,
            attempts,
            release_date: Some(file.release_date),
        })
    }

    /// Merges newly fetched days into the article's entry.
    pub fn store(
        &self,
        article: &ArticleUrl,
        release_date: NaiveDate,
        counts: &BTreeMap<NaiveDate, u64>,
        filled: &BTreeSet<NaiveDate>,
        attempts: u32,
    ) -> Result<(), CacheError> {
        let _guard = self.write_lock.lock().expect("cache lock poisoned");
        let mut days = self.load(article)?;
        let anchor = days.release_date.unwrap_or(release_date);
        days.counts.extend(counts.iter().map(|(d, c)| (*d, *c)));
        for date in counts.keys() {
            if filled.contains(date) {
                days.filled.insert(*date);
            } else {
                days.filled.remove(date);
            }
        }
        let daily: BTreeMap<i32, u64> = days
            .counts
            .iter()
            .map(|(d, c)| ((*d - anchor).num_days() as i32, *c))
            .collect();
        let (first, last) = match (daily.keys().next(), daily.keys().next_back()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Ok(()),
        };
        let file = PageviewFile {
            article_url: article.clone(),
            release_date: anchor,
            daily,
        };
        let meta = CacheMeta {
            article_url: article.clone(),
            release_date: anchor,
            coverage: OffsetRange { start: first, end: last },
            days: days.counts.len(),
            filled_dates: days.filled,
            attempts,
        };
        let mut meta_json = serde_json::to_string_pretty(&meta).expect("meta serializes");
        meta_json.push('\n');
        write_atomic(&self.series_path(article), file.to_json().as_bytes())?;
        write_atomic(&self.meta_path(article), meta_json.as_bytes())
    }
}

/// Writes via a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CacheError> {
    let io = |source| CacheError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
