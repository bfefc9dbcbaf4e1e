use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::Context;
use boxcast_core::alignment::{
    align_catalog, build_film_list_query, build_manifest, parse_film_list, AlignmentError, AlignmentResult,
    AlignmentSummary, FilmList, FixtureSearchProvider, HttpSearchProvider, SearchProvider, SparqlClient,
};
use boxcast_core::data::{parse_catalog_report, Manifest};
use boxcast_core::ingestion::{
    fetch_dataset, load_dataset, CacheStore, FetchError, FetchReport, FixturePageviewProvider, HttpPageviewProvider,
    PageviewProvider, ProviderError,
};
use boxcast_core::modeling::{evaluate as run_evaluation, exclude_top_grossing, EvaluationConfig, RegressionFit};
use boxcast_core::{ArticleUrl, Dataset, FilmRecord, OffsetRange};
use chrono::NaiveDate;
use serde::Serialize;

use crate::config::{FilmListSource, PageviewSource, RunConfig, SearchSource};
use crate::exit::{Classify, Failure, Status};
use crate::report;

/// Writes via a sibling temporary file renamed into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let result = std::fs::create_dir_all(dir)
        .and_then(|_| tempfile::NamedTempFile::new_in(dir))
        .and_then(|mut tmp| {
            tmp.write_all(bytes)?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        });
    result
        .with_context(|| format!("writing {}", path.display()))
        .or_data()
}

fn alignment_failure(e: AlignmentError) -> Failure {
    let status = match e {
        AlignmentError::Precondition(_) | AlignmentError::Config(_) => Status::Usage,
        AlignmentError::Parse(_) | AlignmentError::Schema(_) => Status::Data,
        AlignmentError::Transport(_) | AlignmentError::Search(_) => Status::Provider,
    };
    Failure::new(status, e)
}

pub fn read_catalog(config: &RunConfig) -> Result<Vec<FilmRecord>, Failure> {
    let path = config.catalog_path()?;
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading catalog {}", path.display()))
        .or_data()?;
    let parsed = parse_catalog_report(&bytes, config.market)
        .with_context(|| format!("parsing catalog {}", path.display()))
        .or_data()?;
    for e in &parsed.errors {
        log::warn!("skipping catalog row: {e}");
    }
    if !parsed.errors.is_empty() {
        eprintln!("skipped {} malformed catalog row(s)", parsed.errors.len());
    }
    Ok(parsed.records)
}

fn load_film_list(config: &RunConfig, records: &[FilmRecord]) -> Result<FilmList, Failure> {
    let language = config.market.wiki_language();
    match &config.film_list {
        None => Err(Failure::usage("no film list given (use --fixtures, `film_list` or `sparql_endpoint`)")),
        Some(FilmListSource::Fixture(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading film list {}", path.display()))
                .or_data()?;
            parse_film_list(&text, language)
                .map_err(alignment_failure)
                .map_err(|f| Failure::new(f.status, f.error.context(format!("film list {}", path.display()))))
        }
        Some(FilmListSource::Endpoint { url, years, animation }) => {
            let years: Vec<i32> = match years {
                Some(y) => y.clone(),
                None => {
                    let mut y: Vec<i32> = records.iter().map(|r| chrono::Datelike::year(&r.release_date)).collect();
                    y.sort_unstable();
                    y.dedup();
                    y
                }
            };
            let query = build_film_list_query(language, &years, *animation).map_err(alignment_failure)?;
            SparqlClient::new(url)
                .and_then(|c| c.fetch_film_list(&query))
                .map_err(alignment_failure)
        }
    }
}

fn search_provider(config: &RunConfig) -> Result<Box<dyn SearchProvider>, Failure> {
    match &config.search {
        None => Err(Failure::usage("no search source given (use --fixtures, `search_fixtures` or `search_endpoint`)")),
        Some(SearchSource::Fixture(path)) => Ok(Box::new(
            FixtureSearchProvider::from_path(path)
                .with_context(|| format!("reading search fixtures {}", path.display()))
                .or_data()?,
        )),
        Some(SearchSource::Http {
            endpoint,
            api_key,
            engine_id,
            min_interval,
        }) => Ok(Box::new(
            HttpSearchProvider::new(endpoint, api_key, engine_id, *min_interval)
                .map_err(|e| Failure::new(Status::Provider, e))?,
        )),
    }
}

fn read_overrides(config: &RunConfig) -> Result<BTreeMap<String, ArticleUrl>, Failure> {
    let Some(path) = &config.overrides else {
        return Ok(BTreeMap::new());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading overrides {}", path.display()))
        .or_usage()?;
    let raw: BTreeMap<String, String> = serde_json::from_str(&text)
        .with_context(|| format!("parsing overrides {}", path.display()))
        .or_usage()?;
    raw.into_iter()
        .map(|(title, url)| {
            ArticleUrl::parse(&url)
                .with_context(|| format!("override for {title:?}"))
                .or_usage()
                .map(|u| (title, u))
        })
        .collect()
}

#[derive(Serialize)]
struct AlignmentFile<'a> {
    #[serde(flatten)]
    summary: AlignmentSummary,
    film_list_size: usize,
    warnings: &'a [String],
    films: &'a [AlignmentResult],
}

pub fn align(config: &RunConfig) -> Result<AlignmentSummary, Failure> {
    let records = read_catalog(config)?;
    let list = load_film_list(config, &records)?;
    let provider = search_provider(config)?;
    let overrides = read_overrides(config)?;
    let outcome = align_catalog(&records, &list, provider.as_ref(), &overrides).map_err(alignment_failure)?;
    for w in &outcome.warnings {
        log::warn!("{w}");
    }

    let manifest = build_manifest(config.market, config.window_start, &outcome.results);
    let file = AlignmentFile {
        summary: outcome.summary,
        film_list_size: list.len(),
        warnings: &outcome.warnings,
        films: &outcome.results,
    };
    let mut json = serde_json::to_string_pretty(&file).expect("summary serializes");
    json.push('\n');
    write_atomic(&config.out_dir.join("alignment_summary.json"), json.as_bytes())?;
    write_atomic(&config.manifest_path(), manifest.to_json().as_bytes())?;

    let s = outcome.summary;
    println!(
        "aligned {} of {} films ({} automatic, {} manual, {} unaligned)",
        s.aligned(),
        s.total,
        s.aligned_auto,
        s.aligned_manual,
        s.unaligned
    );
    if s.aligned() == 0 {
        return Err(Failure::data("no films aligned"));
    }
    Ok(s)
}

/// Counts calls made through it.
struct Counting<'a> {
    inner: &'a dyn PageviewProvider,
    calls: AtomicUsize,
}

impl PageviewProvider for Counting<'_> {
    fn daily_views(
        &self,
        article: &ArticleUrl,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<Vec<(NaiveDate, i64)>, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.daily_views(article, start, end)
    }
}

fn read_manifest(config: &RunConfig) -> Result<Manifest, Failure> {
    let path = config.manifest_path();
    if !path.exists() {
        return Err(Failure::data(format!("{} not found; run `align` first", path.display())));
    }
    let mut manifest = Manifest::read(&path).or_data()?;
    if manifest.market != config.market {
        return Err(Failure::usage(format!(
            "manifest is for market {} but {} was requested",
            manifest.market, config.market
        )));
    }
    if manifest.window_start != config.window_start {
        log::info!(
            "using window_start {} instead of the manifest's {}",
            config.window_start,
            manifest.window_start
        );
        manifest.window_start = config.window_start;
    }
    Ok(manifest)
}

fn open_cache(config: &RunConfig) -> Result<CacheStore, Failure> {
    CacheStore::open(&config.cache_dir).or_data()
}

pub fn fetch(config: &RunConfig) -> Result<FetchReport, Failure> {
    let manifest = read_manifest(config)?;
    if manifest.entries.is_empty() {
        return Err(Failure::data("manifest lists no films"));
    }
    let records = read_catalog(config)?;
    let cache = open_cache(config)?;
    let provider: Box<dyn PageviewProvider> = match &config.pageviews {
        None => {
            return Err(Failure::usage(
                "no pageview source given (use --fixtures, `pageview_fixtures` or `endpoint_template`)",
            ))
        }
        Some(PageviewSource::Fixture(dir)) => Box::new(FixturePageviewProvider::new(dir)),
        Some(PageviewSource::Http(template)) => {
            Box::new(HttpPageviewProvider::new(template).map_err(|e| Failure::new(Status::Usage, e))?)
        }
    };
    let counting = Counting {
        inner: provider.as_ref(),
        calls: AtomicUsize::new(0),
    };
    let report_path = config.out_dir.join("fetch_report.json");
    let result = fetch_dataset(&manifest, &records, &counting, &config.policy, &cache);
    let calls = counting.calls.load(Ordering::SeqCst);
    log::info!("provider calls: {calls}");
    match result {
        Ok((dataset, report)) => {
            write_atomic(&report_path, report.to_json().as_bytes())?;
            println!(
                "fetched {} of {} films ({} failed, {} zero-filled days, {} provider calls)",
                dataset.len(),
                report.films.len(),
                report.failures().count(),
                report.filled_days(),
                calls
            );
            Ok(report)
        }
        Err(FetchError::EmptyDataset { report }) => {
            write_atomic(&report_path, report.to_json().as_bytes())?;
            let first = report
                .failures()
                .next()
                .and_then(|f| f.reason.clone())
                .unwrap_or_default();
            Err(Failure::new(
                Status::Provider,
                anyhow::anyhow!("every film failed to fetch; first failure: {first}"),
            ))
        }
        Err(e @ FetchError::Request(_)) => Err(Failure::new(Status::Usage, e)),
        Err(e) if e.is_provider_failure() => Err(Failure::new(Status::Provider, e)),
        Err(e) => Err(Failure::new(Status::Data, e)),
    }
}

/// Dataset from the manifest and whatever the cache holds.
pub fn materialized_dataset(config: &RunConfig) -> Result<Dataset, Failure> {
    let manifest = read_manifest(config)?;
    let records = read_catalog(config)?;
    let cache = open_cache(config)?;
    load_dataset(&manifest, &records, &cache)
        .context("pageviews are not fully cached; run `fetch` first")
        .or_data()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationSummary {
    pub films: usize,
    pub mean_relative_error: f64,
    pub max_r_squared: Option<(i32, f64)>,
}

/// Writes every evaluation artifact of `dataset` into `dir`.
pub fn evaluate_into(config: &RunConfig, dataset: &Dataset, dir: &Path) -> Result<EvaluationSummary, Failure> {
    let params = RegressionFit::parameter_count(config.with_intercept);
    let minimum = params + 1;
    if dataset.len() < minimum {
        return Err(Failure::data(format!(
            "dataset has {} film(s); evaluation needs at least {minimum}",
            dataset.len()
        )));
    }
    let range = OffsetRange::new(config.window_start, -1).expect("checked by RunConfig");
    let eval = EvaluationConfig {
        loocv_t: config.loocv_t,
        r2_range: range,
        with_intercept: config.with_intercept,
        loocv_series: config.loocv_series,
    };
    let report = run_evaluation(dataset, &eval).or_data()?;

    let rows = report::error_rows(&report, config.top_n_errors);
    let market = config.market;
    write_atomic(&dir.join("r2_evolution.csv"), &report::r2_csv(&report.r2_evolution))?;
    write_atomic(&dir.join("relative_errors.csv"), &report::errors_csv(&rows))?;
    for fit in &report.fits {
        write_atomic(&dir.join("fits").join(format!("fit_{}.json", fit.t)), fit.to_json().as_bytes())?;
    }
    write_atomic(
        &dir.join("r2_evolution.svg"),
        report::r2_svg(&report.r2_evolution, &format!("R² by day before release ({market}, n = {})", dataset.len()))
            .as_bytes(),
    )?;
    write_atomic(
        &dir.join("relative_errors.svg"),
        report::errors_svg(
            &rows,
            &format!("Relative error at day {} ({market}, top {} by revenue)", config.loocv_t, rows.len()),
        )
        .as_bytes(),
    )?;
    write_atomic(&dir.join("evaluation_report.json"), report.to_json().as_bytes())?;

    let max = report.max_r_squared().map(|p| (p.t, p.r_squared));
    println!(
        "mean relative error {} over {} films (leave-one-out at day {})",
        report.mean_relative_error,
        dataset.len(),
        config.loocv_t
    );
    if let Some((t, r2)) = max {
        println!("max R² {r2} at day {t}");
    }
    Ok(EvaluationSummary {
        films: dataset.len(),
        mean_relative_error: report.mean_relative_error,
        max_r_squared: max,
    })
}

pub fn evaluate(config: &RunConfig) -> Result<EvaluationSummary, Failure> {
    let dataset = materialized_dataset(config)?;
    evaluate_into(config, &dataset, &config.out_dir)
}

pub fn ablation_dir(config: &RunConfig, k: usize) -> PathBuf {
    config.out_dir.join(format!("ablate_top_{k}"))
}

pub fn ablate_top(config: &RunConfig, k: usize) -> Result<EvaluationSummary, Failure> {
    let dataset = materialized_dataset(config)?;
    let reduced = exclude_top_grossing(&dataset, k).or_data()?;
    evaluate_into(config, &reduced, &ablation_dir(config, k))
}

pub fn pipeline(config: &RunConfig) -> Result<EvaluationSummary, Failure> {
    align(config)?;
    fetch(config)?;
    evaluate(config)
}
