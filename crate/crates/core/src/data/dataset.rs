use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ArticleUrl, FilmRecord, Market, OffsetRange, PageviewSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentMethod {
    Automatic,
    Manual,
}

impl fmt::Display for AlignmentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlignmentMethod::Automatic => "automatic",
            AlignmentMethod::Manual => "manual",
        })
    }
}

/// A catalog film bound to its article and pageview series.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedFilm {
    pub record: FilmRecord,
    pub article_url: ArticleUrl,
    pub views: PageviewSeries,
    pub alignment_method: AlignmentMethod,
}

/// All aligned films of one market. Cumulative views are counted from
/// `window_start` (a day offset at or before release).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub market: Market,
    pub films: Vec<AlignedFilm>,
    pub window_start: i32,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.films.len()
    }

    pub fn is_empty(&self) -> bool {
        self.films.is_empty()
    }

    pub fn revenues(&self) -> Vec<f64> {
        self.films.iter().map(|f| f.record.revenue as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Defect {
    MixedMarket { film: String, market: Market },
    DuplicateArticleUrl { url: String },
    ViewsUrlMismatch { film: String, record_url: String, views_url: String },
    WrongEdition { film: String, url: String },
    NonPositiveRevenue { film: String },
    WindowAfterRelease { window_start: i32 },
    IncompleteCoverage { film: String, coverage: String, required: String },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::MixedMarket { film, market } => write!(f, "mixed market: {film} belongs to {market}"),
            Defect::DuplicateArticleUrl { url } => write!(f, "duplicate article URL {url}"),
            Defect::ViewsUrlMismatch { film, record_url, views_url } => {
                write!(f, "pageview URL mismatch for {film}: {views_url} != {record_url}")
            }
            Defect::WrongEdition { film, url } => write!(f, "wrong encyclopedia edition for {film}: {url}"),
            Defect::NonPositiveRevenue { film } => write!(f, "revenue must be positive for {film}"),
            Defect::WindowAfterRelease { window_start } => {
                write!(f, "window start {window_start} is after release day")
            }
            Defect::IncompleteCoverage { film, coverage, required } => {
                write!(f, "incomplete pageview coverage for {film}: {coverage} does not span {required}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub warnings: Vec<Defect>,
    pub fatal: Vec<Defect>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.warnings.is_empty() && self.fatal.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.fatal.is_empty()
    }
}

/// Reports invariant violations as fatal defects and short pageview
/// coverage as warnings. Never fails.
pub fn validate_dataset(d: &Dataset) -> ValidationReport {
    let mut report = ValidationReport::default();
    if d.window_start > 0 {
        report.fatal.push(Defect::WindowAfterRelease {
            window_start: d.window_start,
        });
    }
    let required = OffsetRange {
        start: d.window_start.min(0),
        end: 0,
    };
    let language = d.market.wiki_language();
    let mut urls = HashSet::new();
    let mut reported = HashSet::new();
    for film in &d.films {
        let name = film.record.key().to_string();
        if film.record.market != d.market {
            report.fatal.push(Defect::MixedMarket {
                film: name.clone(),
                market: film.record.market,
            });
        }
        if film.record.revenue == 0 {
            report.fatal.push(Defect::NonPositiveRevenue { film: name.clone() });
        }
        if !urls.insert(&film.article_url) && reported.insert(&film.article_url) {
            report.fatal.push(Defect::DuplicateArticleUrl {
                url: film.article_url.to_string(),
            });
        }
        if film.views.article_url() != &film.article_url {
            report.fatal.push(Defect::ViewsUrlMismatch {
                film: name.clone(),
                record_url: film.article_url.to_string(),
                views_url: film.views.article_url().to_string(),
            });
        }
        if !film.article_url.is_edition(language) {
            report.fatal.push(Defect::WrongEdition {
                film: name.clone(),
                url: film.article_url.to_string(),
            });
        }
        if !film.views.coverage().covers(required) {
            report.warnings.push(Defect::IncompleteCoverage {
                film: name,
                coverage: film.views.coverage().to_string(),
                required: required.to_string(),
            });
        }
    }
    report
}
