//! Domain model shared by every pipeline stage, plus the file formats used to
//! move it between stages.

mod article;
mod catalog;
mod dataset;
mod manifest;
mod market;
mod series;

pub use article::{ArticleUrl, ArticleUrlError};
pub use catalog::{
    parse_catalog, parse_catalog_report, serialize_catalog, CatalogError, CatalogParse,
    FilmKey, FilmRecord,
};
pub use dataset::{
    validate_dataset, AlignedFilm, AlignmentMethod, Dataset, Defect, ValidationReport,
};
pub use manifest::{Manifest, ManifestEntry};
pub use market::{Market, UnknownMarket, WikiLanguage};
pub use series::{pageview_file_name, OffsetRange, PageviewFile, PageviewSeries, SeriesError};

use std::fmt;

/// Reading or decoding one of the JSON files in this module failed.
#[derive(Debug, thiserror::Error)]
pub enum FileFormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

pub(crate) struct DisplayPath<'a>(pub &'a std::path::Path);

impl fmt::Display for DisplayPath<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.display())
    }
}
