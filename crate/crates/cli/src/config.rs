//! Run configuration: defaults, then `--fixtures` conventions, then the
//! config file, then flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use boxcast_core::ingestion::{ProviderPolicy, RetryPolicy};
use boxcast_core::modeling::DEFAULT_LOOCV_DAY;
use boxcast_core::Market;
use serde::Deserialize;

use crate::exit::{Classify, Failure};

pub const DEFAULT_WINDOW_START: i32 = -49;
pub const DEFAULT_TOP_N_ERRORS: usize = 50;

/// Keys accepted in the config file. Relative paths are resolved against
/// the file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub market: Option<String>,
    pub catalog: Option<PathBuf>,
    pub film_list: Option<PathBuf>,
    pub sparql_endpoint: Option<String>,
    pub film_years: Option<Vec<i32>>,
    pub animation: Option<bool>,
    pub search_fixtures: Option<PathBuf>,
    pub search_endpoint: Option<String>,
    pub search_api_key: Option<String>,
    pub search_engine_id: Option<String>,
    pub search_min_interval_ms: Option<u64>,
    pub overrides: Option<PathBuf>,
    pub pageview_fixtures: Option<PathBuf>,
    pub endpoint_template: Option<String>,
    pub min_request_interval_ms: Option<u64>,
    pub max_concurrent: Option<usize>,
    pub max_attempts: Option<u32>,
    pub retry_backoff_ms: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub window_start: Option<i32>,
    pub loocv_day: Option<i32>,
    pub with_intercept: Option<bool>,
    pub top_n_errors: Option<usize>,
    pub loocv_series: Option<bool>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .or_usage()?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .or_usage()?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.catalog,
            &mut cfg.film_list,
            &mut cfg.search_fixtures,
            &mut cfg.overrides,
            &mut cfg.pageview_fixtures,
            &mut cfg.cache_dir,
            &mut cfg.out_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Fills unset keys from `other`.
    fn or(self, other: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: self.$f.or(other.$f)),* } };
        }
        pick!(
            market, catalog, film_list, sparql_endpoint, film_years, animation, search_fixtures,
            search_endpoint, search_api_key, search_engine_id, search_min_interval_ms, overrides,
            pageview_fixtures, endpoint_template, min_request_interval_ms, max_concurrent,
            max_attempts, retry_backoff_ms, cache_dir, out_dir, window_start, loocv_day,
            with_intercept, top_n_errors, loocv_series
        )
    }

    /// File conventions of a fixture directory.
    pub fn fixture_dir(dir: &Path) -> FileConfig {
        let existing = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
        FileConfig {
            catalog: Some(dir.join("catalog.csv")),
            film_list: existing("film_list.json"),
            search_fixtures: existing("search.json"),
            overrides: existing("overrides.json"),
            pageview_fixtures: existing("pageviews"),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub enum FilmListSource {
    Fixture(PathBuf),
    Endpoint {
        url: String,
        years: Option<Vec<i32>>,
        animation: bool,
    },
}

#[derive(Debug, Clone)]
pub enum SearchSource {
    Fixture(PathBuf),
    Http {
        endpoint: String,
        api_key: String,
        engine_id: String,
        min_interval: Duration,
    },
}

#[derive(Debug, Clone)]
pub enum PageviewSource {
    Fixture(PathBuf),
    Http(String),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub market: Market,
    pub catalog: Option<PathBuf>,
    pub film_list: Option<FilmListSource>,
    pub search: Option<SearchSource>,
    pub overrides: Option<PathBuf>,
    pub pageviews: Option<PageviewSource>,
    pub policy: ProviderPolicy,
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
    pub window_start: i32,
    pub loocv_t: i32,
    pub with_intercept: bool,
    pub top_n_errors: usize,
    pub loocv_series: bool,
}

impl RunConfig {
    /// Merges sources, highest precedence first: flags, config file, fixture
    /// directory conventions.
    pub fn resolve(flags: FileConfig, file: Option<FileConfig>, fixtures: Option<&Path>) -> Result<Self, Failure> {
        let mut merged = flags.or(file.unwrap_or_default());
        if let Some(dir) = fixtures {
            if !dir.is_dir() {
                return Err(Failure::usage(format!("fixture directory {} does not exist", dir.display())));
            }
            merged = merged.or(FileConfig::fixture_dir(dir));
        }

        let market: Market = merged
            .market
            .as_deref()
            .ok_or_else(|| Failure::usage("no market given (use --market or the `market` key)"))?
            .parse()
            .or_usage()?;

        let film_list = match (merged.film_list, merged.sparql_endpoint) {
            (Some(path), _) => Some(FilmListSource::Fixture(path)),
            (None, Some(url)) => Some(FilmListSource::Endpoint {
                url,
                years: merged.film_years,
                animation: merged.animation.unwrap_or(true),
            }),
            (None, None) => None,
        };
        let search = match (merged.search_fixtures, merged.search_endpoint) {
            (Some(path), _) => Some(SearchSource::Fixture(path)),
            (None, Some(endpoint)) => Some(SearchSource::Http {
                endpoint,
                api_key: merged
                    .search_api_key
                    .or_else(|| std::env::var("BOXCAST_SEARCH_API_KEY").ok())
                    .ok_or_else(|| Failure::usage("search_endpoint needs search_api_key"))?,
                engine_id: merged
                    .search_engine_id
                    .ok_or_else(|| Failure::usage("search_endpoint needs search_engine_id"))?,
                min_interval: Duration::from_millis(merged.search_min_interval_ms.unwrap_or(1000)),
            }),
            (None, None) => None,
        };
        let pageviews = match (merged.pageview_fixtures, merged.endpoint_template) {
            (Some(dir), _) => Some(PageviewSource::Fixture(dir)),
            (None, Some(template)) => Some(PageviewSource::Http(template)),
            (None, None) => None,
        };

        // Local fixtures need no throttling unless asked for.
        let default_interval = match pageviews {
            Some(PageviewSource::Fixture(_)) => 0,
            _ => 100,
        };
        let policy = ProviderPolicy {
            max_concurrent: merged.max_concurrent.unwrap_or(4),
            min_request_interval: Duration::from_millis(merged.min_request_interval_ms.unwrap_or(default_interval)),
            retry: RetryPolicy {
                max_attempts: merged.max_attempts.unwrap_or(3),
                backoff: Duration::from_millis(merged.retry_backoff_ms.unwrap_or(500)),
            },
        };
        policy.check().or_usage()?;

        let out_dir = merged.out_dir.unwrap_or_else(|| PathBuf::from("out"));
        let cache_dir = merged.cache_dir.unwrap_or_else(|| out_dir.join("cache"));
        let config = RunConfig {
            market,
            catalog: merged.catalog,
            film_list,
            search,
            overrides: merged.overrides,
            pageviews,
            policy,
            cache_dir,
            out_dir,
            window_start: merged.window_start.unwrap_or(DEFAULT_WINDOW_START),
            loocv_t: merged.loocv_day.unwrap_or(DEFAULT_LOOCV_DAY),
            with_intercept: merged.with_intercept.unwrap_or(true),
            top_n_errors: merged.top_n_errors.unwrap_or(DEFAULT_TOP_N_ERRORS),
            loocv_series: merged.loocv_series.unwrap_or(false),
        };
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), Failure> {
        if !(self.window_start <= self.loocv_t && self.loocv_t <= 0) {
            return Err(Failure::usage(format!(
                "need window_start <= loocv_day <= 0, got window_start {} and loocv_day {}",
                self.window_start, self.loocv_t
            )));
        }
        if self.window_start > -1 {
            return Err(Failure::usage(format!(
                "window_start {} leaves no pre-release day to evaluate",
                self.window_start
            )));
        }
        if self.top_n_errors == 0 {
            return Err(Failure::usage("top_n_errors must be positive"));
        }
        Ok(())
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.out_dir.join("manifest.json")
    }

    pub fn catalog_path(&self) -> Result<&Path, Failure> {
        self.catalog
            .as_deref()
            .ok_or_else(|| Failure::usage("no catalog given (use --fixtures or the `catalog` key)"))
    }
}
