use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AlignmentMethod, ArticleUrl, DisplayPath, FileFormatError, FilmKey, Market};

/// Output of alignment and input of ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub market: Market,
    pub window_start: i32,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub catalog_key: FilmKey,
    pub article_url: ArticleUrl,
    /// Path of the pageview series file, relative to the cache directory.
    pub pageview_file: String,
    pub alignment_method: AlignmentMethod,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self, FileFormatError> {
        let text = std::fs::read_to_string(path).map_err(|source| FileFormatError::Io {
            path: DisplayPath(path).to_string(),
            source,
        })?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|source| FileFormatError::Json {
            path: DisplayPath(path).to_string(),
            source,
        })?;
        manifest.check().map_err(|message| FileFormatError::Invalid {
            path: DisplayPath(path).to_string(),
            message,
        })?;
        Ok(manifest)
    }

    /// Schema-level checks beyond JSON shape: edition match and unique keys.
    pub fn check(&self) -> Result<(), String> {
        let language = self.market.wiki_language();
        let mut keys = std::collections::HashSet::new();
        let mut urls = std::collections::HashSet::new();
        for e in &self.entries {
            if !e.article_url.is_edition(language) {
                return Err(format!("{} is not on the {} edition", e.article_url, language));
            }
            if !keys.insert(&e.catalog_key) {
                return Err(format!("duplicate catalog key {}", e.catalog_key));
            }
            if !urls.insert(&e.article_url) {
                return Err(format!("duplicate article URL {}", e.article_url));
            }
        }
        if self.window_start > 0 {
            return Err(format!("window_start {} is after release", self.window_start));
        }
        Ok(())
    }
}
