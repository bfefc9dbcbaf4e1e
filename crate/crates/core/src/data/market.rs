use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Language edition of the encyclopedia.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WikiLanguage {
    En,
    De,
    Ja,
}

impl WikiLanguage {
    pub const ALL: [WikiLanguage; 3] = [WikiLanguage::En, WikiLanguage::De, WikiLanguage::Ja];

    pub fn code(self) -> &'static str {
        match self {
            WikiLanguage::En => "en",
            WikiLanguage::De => "de",
            WikiLanguage::Ja => "ja",
        }
    }

    /// Localized word for "film" appended to search queries.
    pub fn film_suffix(self) -> &'static str {
        match self {
            WikiLanguage::En | WikiLanguage::De => "film",
            WikiLanguage::Ja => "映画",
        }
    }

    /// Host of the article edition, e.g. `ja.wikipedia.org`.
    pub fn wiki_host(self) -> String {
        format!("{}.wikipedia.org", self.code())
    }

    pub fn from_code(code: &str) -> Option<Self> {
        WikiLanguage::ALL
            .into_iter()
            .find(|l| l.code().eq_ignore_ascii_case(code))
    }
}

impl fmt::Display for WikiLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for WikiLanguage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WikiLanguage::from_code(s.trim()).ok_or_else(|| format!("unsupported wiki language {s:?}"))
    }
}

/// National box-office market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Market {
    Us,
    Uk,
    Au,
    De,
    Ja,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown market code {0:?} (expected one of US, UK, AU, DE, JA)")]
pub struct UnknownMarket(pub String);

impl Market {
    pub const ALL: [Market; 5] = [Market::Us, Market::Uk, Market::Au, Market::De, Market::Ja];

    pub fn code(self) -> &'static str {
        match self {
            Market::Us => "US",
            Market::Uk => "UK",
            Market::Au => "AU",
            Market::De => "DE",
            Market::Ja => "JA",
        }
    }

    /// US, UK and AU all read the English edition.
    pub fn wiki_language(self) -> WikiLanguage {
        match self {
            Market::Us | Market::Uk | Market::Au => WikiLanguage::En,
            Market::De => WikiLanguage::De,
            Market::Ja => WikiLanguage::Ja,
        }
    }

    pub fn film_suffix(self) -> &'static str {
        self.wiki_language().film_suffix()
    }
}

impl fmt::Display for Market {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Market {
    type Err = UnknownMarket;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let code = s.trim();
        Market::ALL
            .into_iter()
            .find(|m| m.code().eq_ignore_ascii_case(code))
            .ok_or_else(|| UnknownMarket(code.to_string()))
    }
}
