use std::collections::BTreeSet;
use std::time::Duration;

use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};

use crate::data::{ArticleUrl, WikiLanguage};

use super::query::{edition_templates, FilmListQuery};
use super::AlignmentError;

/// Where a film list came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilmListSource {
    pub endpoint: String,
    /// RFC 3339 timestamp for live queries, absent for fixtures so output stays reproducible.
    pub retrieved_at: Option<String>,
}

/// Set of article URLs categorized as films in one edition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilmList {
    pub language: WikiLanguage,
    pub urls: BTreeSet<ArticleUrl>,
    pub source: FilmListSource,
}

impl FilmList {
    pub fn new(language: WikiLanguage, urls: impl IntoIterator<Item = ArticleUrl>, endpoint: &str) -> Self {
        Self {
            language,
            urls: urls.into_iter().collect(),
            source: FilmListSource {
                endpoint: endpoint.to_string(),
                retrieved_at: None,
            },
        }
    }

    pub fn contains(&self, url: &ArticleUrl) -> bool {
        self.urls.contains(url)
    }

    pub fn len(&self) -> usize {
        self.urls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.urls.is_empty()
    }
}

#[derive(Deserialize)]
struct ResultsPayload {
    results: ResultsBlock,
}

#[derive(Deserialize)]
struct ResultsBlock {
    bindings: Vec<serde_json::Map<String, serde_json::Value>>,
}

#[derive(Deserialize)]
struct Term {
    #[serde(rename = "type")]
    kind: String,
    value: String,
}

/// Parses a SPARQL 1.1 JSON results document with a `film` binding per row,
/// rewriting resource IRIs to article URLs of `language`.
pub fn parse_film_list(payload: &str, language: WikiLanguage) -> Result<FilmList, AlignmentError> {
    let parsed: ResultsPayload =
        serde_json::from_str(payload).map_err(|e| AlignmentError::Parse(e.to_string()))?;
    let mut urls = BTreeSet::new();
    for (row, binding) in parsed.results.bindings.into_iter().enumerate() {
        let term = binding
            .get("film")
            .ok_or_else(|| AlignmentError::Schema(format!("row {row}: binding missing `film`")))?;
        let term: Term = serde_json::from_value(term.clone())
            .map_err(|e| AlignmentError::Schema(format!("row {row}: {e}")))?;
        if term.kind != "uri" {
            return Err(AlignmentError::Schema(format!(
                "row {row}: `film` is a {} not a uri",
                term.kind
            )));
        }
        urls.insert(resource_to_article(&term.value, language)?);
    }
    Ok(FilmList::new(language, urls, "sparql-results"))
}

/// `http://ja.dbpedia.org/resource/X` → `https://ja.wikipedia.org/wiki/X`.
pub fn resource_to_article(iri: &str, language: WikiLanguage) -> Result<ArticleUrl, AlignmentError> {
    let templates = edition_templates(language)
        .ok_or_else(|| AlignmentError::Config(format!("no resource base for language {language}")))?;
    let base = &templates.resource_base;
    let https_base = base.replacen("http://", "https://", 1);
    let local = iri
        .strip_prefix(base.as_str())
        .or_else(|| iri.strip_prefix(https_base.as_str()))
        .ok_or_else(|| AlignmentError::Schema(format!("{iri} is not a {language} DBpedia resource")))?;
    let title = percent_decode_str(local)
        .decode_utf8()
        .map_err(|_| AlignmentError::Schema(format!("{iri} does not decode to UTF-8")))?;
    ArticleUrl::new(language.code(), &title).map_err(|e| AlignmentError::Schema(e.to_string()))
}

/// Runs film-list queries against a SPARQL endpoint (query via GET).
pub struct SparqlClient {
    client: reqwest::blocking::Client,
    endpoint: String,
}

impl SparqlClient {
    pub fn new(endpoint: &str) -> Result<Self, AlignmentError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .user_agent(concat!("boxcast/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| AlignmentError::Config(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: endpoint.to_string(),
        })
    }

    pub fn fetch_film_list(&self, query: &FilmListQuery) -> Result<FilmList, AlignmentError> {
        log::debug!("sparql query against {}:\n{}", self.endpoint, query.rendered);
        let response = self
            .client
            .get(&self.endpoint)
            .query(&[
                ("query", query.rendered.as_str()),
                ("format", "application/sparql-results+json"),
            ])
            .header("Accept", "application/sparql-results+json")
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.text())
            .map_err(|e| AlignmentError::Transport(e.to_string()))?;
        let mut list = parse_film_list(&response, query.language)?;
        list.source = FilmListSource {
            endpoint: self.endpoint.clone(),
            retrieved_at: Some(chrono::Utc::now().to_rfc3339()),
        };
        Ok(list)
    }
}
