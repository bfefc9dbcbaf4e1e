//! Binding catalog titles to encyclopedia articles.
//!
//! Search results for `<title> <film word>` are filtered to article URLs of
//! the market's edition and then intersected with a SPARQL-derived list of
//! film articles. The highest-ranked surviving candidate wins.

mod film_list;
mod normalize;
mod query;
mod search;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::data::{
    pageview_file_name, AlignmentMethod, ArticleUrl, FilmKey, FilmRecord, Manifest, ManifestEntry,
    Market,
};

pub use film_list::{parse_film_list, resource_to_article, FilmList, FilmListSource, SparqlClient};
pub use normalize::{normalize_title, query_key};
pub use query::{build_film_list_query, edition_templates, squash_whitespace, EditionTemplates, FilmListQuery};
pub use search::{parse_search_response, FixtureSearchProvider, HttpSearchProvider, SearchError, SearchProvider};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlignmentError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed SPARQL results: {0}")]
    Parse(String),
    #[error("unexpected SPARQL results shape: {0}")]
    Schema(String),
    #[error("SPARQL endpoint failure: {0}")]
    Transport(String),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnalignedReason {
    /// The provider returned no article of the right edition.
    NoCandidates,
    /// Candidates existed but none is in the film list.
    AllFiltered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AlignmentOutcome {
    Aligned { url: ArticleUrl, method: AlignmentMethod },
    Unaligned { reason: UnalignedReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateDecision {
    Accepted,
    NotInFilmList,
    /// In the list, but a better-ranked candidate was already accepted.
    LowerRanked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub url: ArticleUrl,
    pub decision: CandidateDecision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub record_key: FilmKey,
    pub outcome: AlignmentOutcome,
    pub candidates_considered: Vec<Candidate>,
    /// Manual override pointing outside the film list; kept but flagged.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub override_outside_list: bool,
}

impl AlignmentResult {
    pub fn aligned_url(&self) -> Option<&ArticleUrl> {
        match &self.outcome {
            AlignmentOutcome::Aligned { url, .. } => Some(url),
            AlignmentOutcome::Unaligned { .. } => None,
        }
    }

    pub fn method(&self) -> Option<AlignmentMethod> {
        match &self.outcome {
            AlignmentOutcome::Aligned { method, .. } => Some(*method),
            AlignmentOutcome::Unaligned { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub total: usize,
    pub aligned_auto: usize,
    pub aligned_manual: usize,
    pub unaligned: usize,
}

impl AlignmentSummary {
    pub fn aligned(&self) -> usize {
        self.aligned_auto + self.aligned_manual
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogAlignment {
    pub results: Vec<AlignmentResult>,
    pub summary: AlignmentSummary,
    pub warnings: Vec<String>,
}

/// Searches `<title> <film word>` and keeps article-namespace links of the
/// market's edition, in provider rank order without repeats.
pub fn resolve_candidates(
    title: &str,
    market: Market,
    provider: &dyn SearchProvider,
) -> Result<Vec<ArticleUrl>, SearchError> {
    let language = market.wiki_language();
    let query = format!("{} {}", title.trim(), market.film_suffix());
    let raw = provider.search(&query, language)?;
    let templates = edition_templates(language);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for link in raw {
        let Ok(url) = ArticleUrl::parse(&link) else {
            log::trace!("dropping non-article link {link}");
            continue;
        };
        if !url.is_edition(language) {
            continue;
        }
        let namespaced = url
            .namespace_prefix()
            .zip(templates)
            .is_some_and(|(ns, t)| t.is_namespace(ns));
        if namespaced {
            continue;
        }
        if seen.insert(url.clone()) {
            out.push(url);
        }
    }
    Ok(out)
}

/// Accepts the first candidate, by provider rank, that is in `list`.
pub fn align_film(
    record: &FilmRecord,
    list: &FilmList,
    provider: &dyn SearchProvider,
) -> Result<AlignmentResult, AlignmentError> {
    if list.language != record.market.wiki_language() {
        return Err(AlignmentError::Precondition(format!(
            "film list is for {} but {} uses {}",
            list.language,
            record.market,
            record.market.wiki_language()
        )));
    }
    let candidates = resolve_candidates(&record.title, record.market, provider)?;
    let mut accepted: Option<ArticleUrl> = None;
    let considered: Vec<Candidate> = candidates
        .into_iter()
        .map(|url| {
            let decision = if !list.contains(&url) {
                CandidateDecision::NotInFilmList
            } else if accepted.is_some() {
                CandidateDecision::LowerRanked
            } else {
                accepted = Some(url.clone());
                CandidateDecision::Accepted
            };
            Candidate { url, decision }
        })
        .collect();

    let outcome = match accepted {
        Some(url) => AlignmentOutcome::Aligned {
            url,
            method: AlignmentMethod::Automatic,
        },
        None if considered.is_empty() => AlignmentOutcome::Unaligned {
            reason: UnalignedReason::NoCandidates,
        },
        None => AlignmentOutcome::Unaligned {
            reason: UnalignedReason::AllFiltered,
        },
    };
    Ok(AlignmentResult {
        record_key: record.key(),
        outcome,
        candidates_considered: considered,
        override_outside_list: false,
    })
}

/// Aligns every record, letting `manual_overrides` (title → URL) take
/// precedence. Output order equals input order.
pub fn align_catalog(
    records: &[FilmRecord],
    list: &FilmList,
    provider: &dyn SearchProvider,
    manual_overrides: &BTreeMap<String, ArticleUrl>,
) -> Result<CatalogAlignment, AlignmentError> {
    let mut markets = records.iter().map(|r| r.market);
    if let Some(first) = markets.next() {
        if let Some(other) = markets.find(|m| *m != first) {
            return Err(AlignmentError::Precondition(format!(
                "records mix markets {first} and {other}"
            )));
        }
    }

    let mut results = Vec::with_capacity(records.len());
    let mut summary = AlignmentSummary {
        total: records.len(),
        ..Default::default()
    };
    let mut warnings = Vec::new();
    let mut claimed: BTreeMap<ArticleUrl, FilmKey> = BTreeMap::new();

    for record in records {
        let result = match manual_overrides.get(&record.title) {
            Some(url) => {
                if !url.is_edition(record.market.wiki_language()) {
                    return Err(AlignmentError::Config(format!(
                        "manual override for {:?} points at {url}, outside the {} edition",
                        record.title,
                        record.market.wiki_language()
                    )));
                }
                let outside = !list.contains(url);
                if outside {
                    warnings.push(format!(
                        "manual override for {} ({url}) is not in the film list",
                        record.key()
                    ));
                }
                AlignmentResult {
                    record_key: record.key(),
                    outcome: AlignmentOutcome::Aligned {
                        url: url.clone(),
                        method: AlignmentMethod::Manual,
                    },
                    candidates_considered: Vec::new(),
                    override_outside_list: outside,
                }
            }
            None => align_film(record, list, provider)?,
        };
        if let Some(url) = result.aligned_url() {
            if let Some(previous) = claimed.get(url) {
                warnings.push(format!(
                    "{url} is aligned to both {previous} and {}",
                    result.record_key
                ));
            } else {
                claimed.insert(url.clone(), result.record_key.clone());
            }
        }
        match result.method() {
            Some(AlignmentMethod::Automatic) => summary.aligned_auto += 1,
            Some(AlignmentMethod::Manual) => summary.aligned_manual += 1,
            None => summary.unaligned += 1,
        }
        results.push(result);
    }

    Ok(CatalogAlignment {
        results,
        summary,
        warnings,
    })
}

/// Aligned films as a manifest. When two films claim the same article only
/// the first keeps it, since article URLs must be unique within a dataset.
pub fn build_manifest(market: Market, window_start: i32, results: &[AlignmentResult]) -> Manifest {
    let mut seen = HashSet::new();
    let entries = results
        .iter()
        .filter_map(|r| match &r.outcome {
            AlignmentOutcome::Aligned { url, method } if seen.insert(url.clone()) => Some(ManifestEntry {
                catalog_key: r.record_key.clone(),
                article_url: url.clone(),
                pageview_file: pageview_file_name(url),
                alignment_method: *method,
            }),
            _ => None,
        })
        .collect();
    Manifest {
        market,
        window_start,
        entries,
    }
}
