use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ArticleUrl, DisplayPath, FileFormatError};

/// Inclusive range of day offsets relative to release (release day is 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OffsetRange {
    pub start: i32,
    pub end: i32,
}

impl OffsetRange {
    pub fn new(start: i32, end: i32) -> Option<Self> {
        (start <= end).then_some(Self { start, end })
    }

    pub fn contains(&self, offset: i32) -> bool {
        self.start <= offset && offset <= self.end
    }

    pub fn covers(&self, other: OffsetRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

impl fmt::Display for OffsetRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("offset {offset} lies outside coverage {coverage}")]
    OutsideCoverage { offset: i32, coverage: OffsetRange },
    #[error("pageview series has no days")]
    Empty,
    #[error("invalid day offset key {0:?}")]
    BadOffset(String),
}

/// Daily view counts of one article keyed by day offset.
///
/// Offsets inside `coverage` that are missing from `daily` read as zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageviewSeries {
    article_url: ArticleUrl,
    release_date: NaiveDate,
    coverage: OffsetRange,
    daily: BTreeMap<i32, u64>,
}

impl PageviewSeries {
    pub fn new(
        article_url: ArticleUrl,
        release_date: NaiveDate,
        coverage: OffsetRange,
        daily: BTreeMap<i32, u64>,
    ) -> Result<Self, SeriesError> {
        if let Some(&offset) = daily.keys().find(|o| !coverage.contains(**o)) {
            return Err(SeriesError::OutsideCoverage { offset, coverage });
        }
        Ok(Self {
            article_url,
            release_date,
            coverage,
            daily,
        })
    }

    /// Dense series over `coverage` built from counts in offset order.
    pub fn from_counts(
        article_url: ArticleUrl,
        release_date: NaiveDate,
        start: i32,
        counts: &[u64],
    ) -> Result<Self, SeriesError> {
        if counts.is_empty() {
            return Err(SeriesError::Empty);
        }
        let coverage = OffsetRange::new(start, start + counts.len() as i32 - 1).expect("nonempty");
        let daily = coverage.iter().zip(counts.iter().copied()).collect();
        Self::new(article_url, release_date, coverage, daily)
    }

    pub fn article_url(&self) -> &ArticleUrl {
        &self.article_url
    }

    pub fn release_date(&self) -> NaiveDate {
        self.release_date
    }

    pub fn coverage(&self) -> OffsetRange {
        self.coverage
    }

    pub fn daily(&self) -> &BTreeMap<i32, u64> {
        &self.daily
    }

    /// Count on `offset`, zero for covered days with no entry, `None` outside coverage.
    pub fn views_on(&self, offset: i32) -> Option<u64> {
        self.coverage
            .contains(offset)
            .then(|| self.daily.get(&offset).copied().unwrap_or(0))
    }

    pub fn date_of(&self, offset: i32) -> NaiveDate {
        self.release_date + Duration::days(offset as i64)
    }

    pub fn offset_of(&self, date: NaiveDate) -> i32 {
        (date - self.release_date).num_days() as i32
    }

    pub fn to_file(&self) -> PageviewFile {
        PageviewFile {
            article_url: self.article_url.clone(),
            release_date: self.release_date,
            daily: self.daily.clone(),
        }
    }
}

/// On-disk pageview series: `{article_url, release_date, daily}` with `daily`
/// mapping stringified offsets to counts, written in numeric offset order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageviewFile {
    pub article_url: ArticleUrl,
    pub release_date: NaiveDate,
    #[serde(serialize_with = "ser_offsets", deserialize_with = "de_offsets")]
    pub daily: BTreeMap<i32, u64>,
}

impl PageviewFile {
    /// Coverage is the span of stored offsets.
    pub fn into_series(self) -> Result<PageviewSeries, SeriesError> {
        let (first, last) = match (self.daily.keys().next(), self.daily.keys().next_back()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(SeriesError::Empty),
        };
        PageviewSeries::new(
            self.article_url,
            self.release_date,
            OffsetRange::new(first, last).expect("ordered keys"),
            self.daily,
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("pageview file serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self, FileFormatError> {
        let text = std::fs::read_to_string(path).map_err(|source| FileFormatError::Io {
            path: DisplayPath(path).to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| FileFormatError::Json {
            path: DisplayPath(path).to_string(),
            source,
        })
    }
}

/// File name of an article's series inside a cache or fixture directory:
/// the first 16 hex digits of the SHA-256 of the canonical URL.
pub fn pageview_file_name(url: &ArticleUrl) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(url.to_string().as_bytes());
    format!("{}.json", &hex::encode(digest)[..16])
}

fn ser_offsets<S: Serializer>(daily: &BTreeMap<i32, u64>, serializer: S) -> Result<S::Ok, S::Error> {
    let mut map = serializer.serialize_map(Some(daily.len()))?;
    for (offset, count) in daily {
        map.serialize_entry(&offset.to_string(), count)?;
    }
    map.end()
}

fn de_offsets<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BTreeMap<i32, u64>, D::Error> {
    let raw = BTreeMap::<String, u64>::deserialize(deserializer)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<i32>()
                .map(|o| (o, v))
                .map_err(|_| serde::de::Error::custom(SeriesError::BadOffset(k)))
        })
        .collect()
}
