use std::fmt;
use std::str::FromStr;

use percent_encoding::percent_decode_str;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::WikiLanguage;

/// Canonical encyclopedia article URL: `https://<lang>.wikipedia.org/wiki/<Title>`.
///
/// The title is stored percent-decoded with spaces replaced by underscores, so
/// two spellings of the same link compare equal. Query strings, fragments and
/// the mobile host are dropped during canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArticleUrl {
    language: String,
    title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArticleUrlError {
    #[error("not an http(s) URL: {0:?}")]
    Scheme(String),
    #[error("not a wikipedia host: {0:?}")]
    Host(String),
    #[error("not an article path (expected /wiki/<title>): {0:?}")]
    Path(String),
    #[error("article title is empty or not valid UTF-8: {0:?}")]
    Title(String),
}

impl ArticleUrl {
    pub fn new(language: &str, title: &str) -> Result<Self, ArticleUrlError> {
        let title = title.trim().replace(' ', "_");
        if title.is_empty() || title.chars().all(|c| c == '_') {
            return Err(ArticleUrlError::Title(title));
        }
        let language = language.to_ascii_lowercase();
        if language.is_empty() || !language.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(ArticleUrlError::Host(language));
        }
        Ok(Self { language, title })
    }

    /// Parses and canonicalizes any http(s) link into the article space of
    /// some language edition.
    pub fn parse(raw: &str) -> Result<Self, ArticleUrlError> {
        let raw = raw.trim();
        let rest = raw
            .strip_prefix("https://")
            .or_else(|| raw.strip_prefix("http://"))
            .or_else(|| raw.strip_prefix("//"))
            .ok_or_else(|| ArticleUrlError::Scheme(raw.to_string()))?;
        let (host, path) = match rest.find('/') {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        let host = host.to_ascii_lowercase();
        let language = host
            .strip_suffix(".wikipedia.org")
            .map(|h| h.strip_suffix(".m").unwrap_or(h))
            .filter(|h| !h.is_empty() && !h.contains('.'))
            .ok_or_else(|| ArticleUrlError::Host(host.clone()))?;
        let path = path.split(['?', '#']).next().unwrap_or_default();
        let encoded = path
            .strip_prefix("/wiki/")
            .ok_or_else(|| ArticleUrlError::Path(raw.to_string()))?;
        let title = percent_decode_str(encoded)
            .decode_utf8()
            .map_err(|_| ArticleUrlError::Title(encoded.to_string()))?;
        Self::new(language, &title)
    }

    /// Language code of the host edition (`en`, `de`, `ja`, ...).
    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn is_edition(&self, lang: WikiLanguage) -> bool {
        self.language == lang.code()
    }

    /// Title with underscores, exactly as it appears in the path.
    pub fn title(&self) -> &str {
        &self.title
    }

    /// Namespace prefix of the title (`Category`, `ファイル`, ...) if any.
    pub fn namespace_prefix(&self) -> Option<&str> {
        self.title.split_once(':').map(|(ns, _)| ns)
    }

    pub fn as_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ArticleUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "https://{}.wikipedia.org/wiki/{}", self.language, self.title)
    }
}

impl FromStr for ArticleUrl {
    type Err = ArticleUrlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for ArticleUrl {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ArticleUrl {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        ArticleUrl::parse(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_encoding_scheme_and_mobile_host() {
        let a = ArticleUrl::parse("http://ja.m.wikipedia.org/wiki/%E9%A2%A8%E7%AB%8B%E3%81%A1%E3%81%AC?x=1#top")
            .unwrap();
        assert_eq!(a.to_string(), "https://ja.wikipedia.org/wiki/風立ちぬ");
        assert_eq!(a.language(), "ja");
        assert!(a.is_edition(WikiLanguage::Ja));

        let b = ArticleUrl::parse("https://de.wikipedia.org/wiki/42 (Film)").unwrap();
        assert_eq!(b.to_string(), "https://de.wikipedia.org/wiki/42_(Film)");
    }

    #[test]
    fn rejects_non_article_links() {
        assert!(matches!(
            ArticleUrl::parse("https://ja.wikipedia.org/w/index.php?title=X"),
            Err(ArticleUrlError::Path(_))
        ));
        assert!(matches!(
            ArticleUrl::parse("https://www.example.com/wiki/X"),
            Err(ArticleUrlError::Host(_))
        ));
        assert!(matches!(ArticleUrl::parse("ftp://en.wikipedia.org/wiki/X"), Err(ArticleUrlError::Scheme(_))));
        assert!(matches!(ArticleUrl::parse("https://en.wikipedia.org/wiki/"), Err(ArticleUrlError::Title(_))));
    }

    #[test]
    fn namespace_prefix() {
        let a = ArticleUrl::parse("https://en.wikipedia.org/wiki/Category:2013_films").unwrap();
        assert_eq!(a.namespace_prefix(), Some("Category"));
        let b = ArticleUrl::parse("https://en.wikipedia.org/wiki/Frozen_(2013_film)").unwrap();
        assert_eq!(b.namespace_prefix(), None);
    }
}
