//! Seeded synthetic markets.
//!
//! Each film has a background level of article traffic that says nothing
//! about its revenue and a "hype" component that ramps up exponentially as
//! release approaches and drives both screens and revenue. Cumulative views
//! counted early in the window are therefore mostly background, and become
//! informative only in the final weeks.

use chrono::{Duration, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::data::{AlignedFilm, AlignmentMethod, ArticleUrl, Dataset, FilmRecord, Market, PageviewSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub market: Market,
    pub films: usize,
    pub window_start: i32,
    /// e-folding time, in days, of the pre-release traffic ramp.
    pub ramp_days: f64,
    /// Revenue per screen.
    pub revenue_per_screen: f64,
    /// Revenue per hype-driven view accrued over the whole window.
    pub revenue_per_view: f64,
    /// Standard deviation of additive revenue noise, as a fraction of the
    /// mean noiseless revenue. Revenue is floored at 5% of that mean.
    pub noise: f64,
    /// Number of top-hype films whose revenue gets extra multiplicative noise.
    pub outliers: usize,
    /// Log-scale standard deviation of the outlier noise.
    pub outlier_sigma: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            market: Market::Us,
            films: 300,
            window_start: -49,
            ramp_days: 10.0,
            revenue_per_screen: 2_500.0,
            revenue_per_view: 100.0,
            noise: 0.25,
            outliers: 0,
            outlier_sigma: 0.0,
        }
    }
}

/// Latent traits of one synthetic film.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFilm {
    pub title: String,
    pub release_date: NaiveDate,
    pub screens: u32,
    pub revenue: u64,
    /// Daily counts from `window_start` through release day.
    pub daily: Vec<u64>,
}

fn lognormal(mu: f64, sigma: f64) -> LogNormal<f64> {
    LogNormal::new(mu, sigma).expect("valid lognormal")
}

/// Films in a fixed order for the given seed.
pub fn generate_films(config: &SyntheticConfig, seed: u64) -> Vec<SyntheticFilm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let days = (1 - config.window_start) as usize;
    let hype_dist = lognormal(0.0, 0.9);
    let background_dist = lognormal(7.0, 0.6);
    let day_noise = lognormal(0.0, 0.35);
    let screen_noise = lognormal(0.0, 0.6);
    let first_release = NaiveDate::from_ymd_opt(2013, 1, 4).expect("valid date");

    struct Latent {
        screens: u32,
        hype_views: f64,
        daily: Vec<u64>,
    }

    let latent: Vec<Latent> = (0..config.films)
        .map(|_| {
            let hype: f64 = hype_dist.sample(&mut rng);
            let background: f64 = background_dist.sample(&mut rng);
            let screens = (150.0 + 900.0 * hype.sqrt() * screen_noise.sample(&mut rng)).round().min(4500.0) as u32;
            let mut hype_views = 0.0;
            let daily = (0..days)
                .map(|i| {
                    let offset = config.window_start + i as i32;
                    let ramp = 4_000.0 * hype * (offset as f64 / config.ramp_days).exp();
                    hype_views += ramp;
                    let v = background * day_noise.sample(&mut rng) + ramp * day_noise.sample(&mut rng);
                    v.round() as u64
                })
                .collect();
            Latent {
                screens,
                hype_views,
                daily,
            }
        })
        .collect();

    let noiseless: Vec<f64> = latent
        .iter()
        .map(|l| config.revenue_per_screen * l.screens as f64 + config.revenue_per_view * l.hype_views)
        .collect();
    let mean = noiseless.iter().sum::<f64>() / noiseless.len().max(1) as f64;
    let noise = Normal::new(0.0, (config.noise * mean).max(f64::MIN_POSITIVE)).expect("valid normal");

    let mut outlier_rank: Vec<usize> = (0..latent.len()).collect();
    outlier_rank.sort_by(|&a, &b| latent[b].hype_views.total_cmp(&latent[a].hype_views));
    let mut is_outlier = vec![false; latent.len()];
    for &i in outlier_rank.iter().take(config.outliers) {
        is_outlier[i] = true;
    }
    let outlier_noise = lognormal(0.0, config.outlier_sigma.max(f64::MIN_POSITIVE));

    latent
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let mut revenue = noiseless[i] + noise.sample(&mut rng);
            if is_outlier[i] {
                revenue *= outlier_noise.sample(&mut rng);
            }
            SyntheticFilm {
                title: format!("Synthetic Film {:03}", i + 1),
                release_date: first_release + Duration::days(7 * (i as i64 % 104)),
                screens: l.screens,
                revenue: revenue.max(0.05 * mean).round() as u64,
                daily: l.daily,
            }
        })
        .collect()
}

/// A complete aligned dataset for `config`, reproducible from `seed`.
pub fn generate_dataset(config: &SyntheticConfig, seed: u64) -> Dataset {
    let language = config.market.wiki_language();
    let films = generate_films(config, seed)
        .into_iter()
        .map(|f| {
            let url = ArticleUrl::new(language.code(), &f.title).expect("synthetic titles are valid");
            let views = PageviewSeries::from_counts(url.clone(), f.release_date, config.window_start, &f.daily)
                .expect("dense series");
            AlignedFilm {
                record: FilmRecord {
                    title: f.title,
                    market: config.market,
                    release_date: f.release_date,
                    revenue: f.revenue,
                    screens: f.screens,
                },
                article_url: url,
                views,
                alignment_method: AlignmentMethod::Automatic,
            }
        })
        .collect();
    Dataset {
        market: config.market,
        films,
        window_start: config.window_start,
    }
}
