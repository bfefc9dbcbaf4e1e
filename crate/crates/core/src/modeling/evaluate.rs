use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Market, OffsetRange};

use super::{fits_over, loocv_predictions, loocv_r2_evolution, relative_errors, ModelError, RegressionFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvaluationConfig {
    pub loocv_t: i32,
    pub r2_range: OffsetRange,
    pub with_intercept: bool,
    /// Also compute R² of the leave-one-out predictions for every day.
    pub loocv_series: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilmEvaluation {
    pub title: String,
    pub release_date: NaiveDate,
    pub revenue: f64,
    pub prediction: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R2Point {
    pub t: i32,
    pub r_squared: f64,
}

/// LOOCV predictions and relative errors at one day, plus R² over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub market: Market,
    pub with_intercept: bool,
    pub loocv_t: i32,
    pub per_film: Vec<FilmEvaluation>,
    pub mean_relative_error: f64,
    pub r2_evolution: Vec<R2Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loocv_r2_evolution: Option<Vec<R2Point>>,
    /// Per-day fits behind `r2_evolution`; written to their own files.
    #[serde(skip)]
    pub fits: Vec<RegressionFit>,
}

impl EvaluationReport {
    /// Films by revenue, highest first (ties: earlier release, then title).
    pub fn by_revenue(&self) -> Vec<&FilmEvaluation> {
        let mut films: Vec<&FilmEvaluation> = self.per_film.iter().collect();
        films.sort_by(|a, b| {
            b.revenue
                .total_cmp(&a.revenue)
                .then(a.release_date.cmp(&b.release_date))
                .then(a.title.cmp(&b.title))
        });
        films
    }

    pub fn max_r_squared(&self) -> Option<R2Point> {
        self.r2_evolution
            .iter()
            .copied()
            .max_by(|a, b| a.r_squared.total_cmp(&b.r_squared).then(b.t.cmp(&a.t)))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn evaluate(d: &Dataset, config: &EvaluationConfig) -> Result<EvaluationReport, ModelError> {
    let predictions = loocv_predictions(d, config.loocv_t, config.with_intercept)
        .map_err(|e| ModelError::AtDay {
            t: config.loocv_t,
            source: Box::new(e),
        })?;
    let revenues = d.revenues();
    let errors = relative_errors(&revenues, &predictions)?;
    let per_film: Vec<FilmEvaluation> = d
        .films
        .iter()
        .zip(predictions.iter().zip(&errors))
        .map(|(film, (&prediction, &relative_error))| FilmEvaluation {
            title: film.record.title.clone(),
            release_date: film.record.release_date,
            revenue: film.record.revenue as f64,
            prediction,
            relative_error,
        })
        .collect();
    let mean_relative_error = errors.iter().sum::<f64>() / errors.len() as f64;

    let fits = fits_over(d, config.r2_range, config.with_intercept)?;
    let r2_evolution = fits
        .iter()
        .map(|f| R2Point {
            t: f.t,
            r_squared: f.r_squared,
        })
        .collect();
    let loocv_r2_evolution = if config.loocv_series {
        Some(
            loocv_r2_evolution(d, config.r2_range, config.with_intercept)?
                .into_iter()
                .map(|(t, r_squared)| R2Point { t, r_squared })
                .collect(),
        )
    } else {
        None
    };

    Ok(EvaluationReport {
        market: d.market,
        with_intercept: config.with_intercept,
        loocv_t: config.loocv_t,
        per_film,
        mean_relative_error,
        r2_evolution,
        loocv_r2_evolution,
        fits,
    })
}
