//! Opening-weekend box office forecasting from screen counts and cumulative
//! encyclopedia pageviews.
//!
//! The crate is organised as a pipeline:
//!
//! * [`data`] holds the validated domain model and the on-disk formats
//!   (catalog CSV, pageview series JSON, aligned-dataset manifest).
//! * [`alignment`] binds catalog titles to exactly one article URL by
//!   intersecting search results with SPARQL-derived film lists.
//! * [`ingestion`] fetches daily pageview counts through a pluggable provider
//!   with rate limiting, retries and a local cache.
//! * [`modeling`] fits the per-day least-squares models, runs leave-one-out
//!   cross-validation and computes relative errors and R² evolution.
//! * [`synthetic`] generates seeded synthetic markets for testing.

pub mod alignment;
pub mod data;
pub mod ingestion;
pub mod modeling;
pub mod synthetic;

pub use data::{
    AlignedFilm, AlignmentMethod, ArticleUrl, Dataset, FilmKey, FilmRecord, Market,
    OffsetRange, PageviewSeries, WikiLanguage,
};
