//! Box-office catalog CSV: `title,market,release_date,revenue,screens`.

use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::Market;

pub const CATALOG_COLUMNS: [&str; 5] = ["title", "market", "release_date", "revenue", "screens"];

/// One film in one market.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilmRecord {
    pub title: String,
    pub market: Market,
    pub release_date: NaiveDate,
    /// Opening-weekend gross in market-local currency units. Always > 0.
    pub revenue: u64,
    pub screens: u32,
}

impl FilmRecord {
    pub fn key(&self) -> FilmKey {
        FilmKey {
            title: self.title.clone(),
            release_date: self.release_date,
        }
    }
}

/// Identifies a film within one market; re-releases differ by date.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FilmKey {
    pub title: String,
    pub release_date: NaiveDate,
}

impl fmt::Display for FilmKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.title, self.release_date)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog is not valid UTF-8")]
    Encoding,
    #[error("catalog header must contain exactly the columns title,market,release_date,revenue,screens (found {0:?})")]
    Header(String),
    #[error("malformed {field} {value:?} (line {line})")]
    Field {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("malformed row (line {line}): {message}")]
    Row { line: u64, message: String },
    #[error("revenue must be positive (line {line})")]
    NonPositiveRevenue { line: u64 },
    #[error("market {found} does not match expected market {expected} (line {line})")]
    MarketMismatch {
        line: u64,
        found: Market,
        expected: Market,
    },
    #[error("duplicate film {key} (line {line})")]
    Duplicate { line: u64, key: FilmKey },
}

impl CatalogError {
    pub fn line(&self) -> Option<u64> {
        match self {
            CatalogError::Field { line, .. }
            | CatalogError::Row { line, .. }
            | CatalogError::NonPositiveRevenue { line }
            | CatalogError::MarketMismatch { line, .. }
            | CatalogError::Duplicate { line, .. } => Some(*line),
            CatalogError::Encoding | CatalogError::Header(_) => None,
        }
    }
}

/// Result of a lenient parse: every data row ends up either in `records` or
/// in `errors`, never both and never neither.
#[derive(Debug, Default, Clone)]
pub struct CatalogParse {
    pub records: Vec<FilmRecord>,
    pub errors: Vec<CatalogError>,
    pub data_rows: usize,
}

/// Strict parse: the first bad row aborts.
pub fn parse_catalog(bytes: &[u8], market: Market) -> Result<Vec<FilmRecord>, CatalogError> {
    let parsed = parse_catalog_report(bytes, market)?;
    match parsed.errors.into_iter().next() {
        Some(err) => Err(err),
        None => Ok(parsed.records),
    }
}

/// Lenient parse that collects per-row errors. Header and encoding problems
/// still fail the whole file.
pub fn parse_catalog_report(bytes: &[u8], market: Market) -> Result<CatalogParse, CatalogError> {
    let text = std::str::from_utf8(bytes).map_err(|_| CatalogError::Encoding)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| CatalogError::Header(e.to_string()))?
        .clone();
    let columns = column_positions(&header)?;

    let mut out = CatalogParse::default();
    let mut seen = HashSet::new();
    for row in reader.records() {
        out.data_rows += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                out.errors.push(CatalogError::Row {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        match parse_row(&row, &columns, line, market) {
            Ok(record) => {
                if seen.insert(record.key()) {
                    out.records.push(record);
                } else {
                    out.errors.push(CatalogError::Duplicate {
                        line,
                        key: record.key(),
                    });
                }
            }
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

fn column_positions(header: &csv::StringRecord) -> Result<[usize; 5], CatalogError> {
    let names: Vec<&str> = header.iter().collect();
    let mut positions = [0usize; 5];
    if names.len() != CATALOG_COLUMNS.len() {
        return Err(CatalogError::Header(names.join(",")));
    }
    for (slot, want) in positions.iter_mut().zip(CATALOG_COLUMNS) {
        *slot = names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(want))
            .ok_or_else(|| CatalogError::Header(names.join(",")))?;
    }
    Ok(positions)
}

fn parse_row(
    row: &csv::StringRecord,
    columns: &[usize; 5],
    line: u64,
    market: Market,
) -> Result<FilmRecord, CatalogError> {
    if row.len() != CATALOG_COLUMNS.len() {
        return Err(CatalogError::Row {
            line,
            message: format!("expected 5 fields, found {}", row.len()),
        });
    }
    let field = |i: usize| row.get(columns[i]).unwrap_or_default();
    let bad = |field: &'static str, value: &str| CatalogError::Field {
        line,
        field,
        value: value.to_string(),
    };

    let title = field(0);
    if title.is_empty() {
        return Err(bad("title", title));
    }
    let row_market: Market = field(1).parse().map_err(|_| bad("market", field(1)))?;
    if row_market != market {
        return Err(CatalogError::MarketMismatch {
            line,
            found: row_market,
            expected: market,
        });
    }
    let release_date = NaiveDate::parse_from_str(field(2), "%Y-%m-%d")
        .map_err(|_| bad("release_date", field(2)))?;
    let revenue = match field(3).strip_prefix('-') {
        Some(magnitude) if parse_unsigned(magnitude).is_some() => 0,
        _ => parse_unsigned(field(3)).ok_or_else(|| bad("revenue", field(3)))?,
    };
    if revenue == 0 {
        return Err(CatalogError::NonPositiveRevenue { line });
    }
    let screens = parse_unsigned(field(4))
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| bad("screens", field(4)))?;

    Ok(FilmRecord {
        title: title.to_string(),
        market,
        release_date,
        revenue,
        screens,
    })
}

fn parse_unsigned(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Writes records in the canonical column order.
pub fn serialize_catalog(records: &[FilmRecord]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(CATALOG_COLUMNS)
        .expect("writing to memory");
    for r in records {
        writer
            .write_record([
                r.title.as_str(),
                r.market.code(),
                &r.release_date.format("%Y-%m-%d").to_string(),
                &r.revenue.to_string(),
                &r.screens.to_string(),
            ])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}
