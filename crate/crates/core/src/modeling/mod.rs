//! Per-day regression of opening-weekend revenue on screen count and
//! cumulative pageviews, with leave-one-out evaluation.
//!
//! For a day offset `t` the model is
//!
//! ```text
//! revenue_i = a_screens * screens_i + a_views * views_i(t) [+ intercept] + residual_i
//! ```
//!
//! where `views_i(t)` sums daily views from the dataset's window start
//! through `t`. One model is fitted per day, which is what the R² evolution
//! series tracks.

mod evaluate;
mod qr;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, OffsetRange, PageviewSeries};

pub use evaluate::{evaluate, EvaluationConfig, EvaluationReport, FilmEvaluation, R2Point};
pub use qr::{rank_tolerance, solve_least_squares, ColMatrix, LeastSquaresSolution};

/// Day offset used for LOOCV predictions unless configured otherwise.
pub const DEFAULT_LOOCV_DAY: i32 = -7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("window {window} not covered by pageviews of: {}", films.join(", "))]
    Coverage { window: OffsetRange, films: Vec<String> },
    #[error("underdetermined fit: {n} rows for {params} parameters")]
    Underdetermined { n: usize, params: usize },
    #[error("targets have zero total sum of squares")]
    DegenerateTarget,
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<ModelError>,
    },
    #[error("day {t}: {source}")]
    AtDay {
        t: i32,
        #[source]
        source: Box<ModelError>,
    },
}

impl ModelError {
    fn at_day(self, t: i32) -> Self {
        ModelError::AtDay {
            t,
            source: Box::new(self),
        }
    }
}

/// Views summed over the inclusive window `[t0, t]`. Covered days without an
/// entry count as zero.
pub fn cumulative_views(series: &PageviewSeries, t0: i32, t: i32) -> Result<u64, ModelError> {
    if t < t0 {
        return Err(ModelError::Argument(format!(
            "window end {t} precedes window start {t0}"
        )));
    }
    let window = OffsetRange { start: t0, end: t };
    if !series.coverage().covers(window) {
        return Err(ModelError::Coverage {
            window,
            films: vec![format!("{} (covers {})", series.article_url(), series.coverage())],
        });
    }
    Ok(series.daily().range(t0..=t).map(|(_, v)| v).sum())
}

/// Features and targets of every film for one day offset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignMatrix {
    pub t: i32,
    /// Screen counts, dataset order.
    pub screens: Vec<f64>,
    /// Cumulative views through `t`, dataset order.
    pub views: Vec<f64>,
    pub targets: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(t: i32, screens: Vec<f64>, views: Vec<f64>, targets: Vec<f64>) -> Result<Self, ModelError> {
        if screens.len() != targets.len() || views.len() != targets.len() {
            return Err(ModelError::Argument(format!(
                "feature lengths {}/{} differ from target length {}",
                screens.len(),
                views.len(),
                targets.len()
            )));
        }
        Ok(Self {
            t,
            screens,
            views,
            targets,
        })
    }

    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> [f64; 2] {
        [self.screens[i], self.views[i]]
    }

    pub fn without_row(&self, i: usize) -> DesignMatrix {
        let drop = |v: &[f64]| {
            v.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| *x)
                .collect()
        };
        DesignMatrix {
            t: self.t,
            screens: drop(&self.screens),
            views: drop(&self.views),
            targets: drop(&self.targets),
        }
    }
}

/// Assembles the design matrix for day `t` in dataset order.
pub fn build_design_matrix(d: &Dataset, t: i32) -> Result<DesignMatrix, ModelError> {
    if t < d.window_start || t > 0 {
        return Err(ModelError::Argument(format!(
            "day {t} outside [{}, 0]",
            d.window_start
        )));
    }
    let window = OffsetRange {
        start: d.window_start,
        end: t,
    };
    let mut views = Vec::with_capacity(d.len());
    let mut short = Vec::new();
    for film in &d.films {
        if film.views.coverage().covers(window) {
            views.push(cumulative_views(&film.views, d.window_start, t)? as f64);
        } else {
            short.push(format!("{} (covers {})", film.record.key(), film.views.coverage()));
        }
    }
    if !short.is_empty() {
        return Err(ModelError::Coverage { window, films: short });
    }
    DesignMatrix::new(
        t,
        d.films.iter().map(|f| f.record.screens as f64).collect(),
        views,
        d.revenues(),
    )
}

/// A fitted per-day model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub t: i32,
    pub n: usize,
    pub rank: usize,
    pub with_intercept: bool,
    pub alpha_screens: f64,
    pub alpha_views: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    pub r_squared: f64,
}

impl RegressionFit {
    pub fn parameter_count(with_intercept: bool) -> usize {
        if with_intercept {
            3
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("fit serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for RegressionFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} n={} screens={} views={}",
            self.t, self.n, self.alpha_screens, self.alpha_views
        )?;
        if let Some(c) = self.intercept {
            write!(f, " intercept={c}")?;
        }
        write!(f, " R²={}", self.r_squared)
    }
}

/// Ordinary least squares on `[screens, views]` (plus a constant column
/// when `with_intercept`).
///
/// The intercept model is solved on centered columns and the constant is
/// recovered from the means, so a rank-deficient design yields the
/// minimum-norm slope pair with an unpenalised intercept.
pub fn fit_ols(m: &DesignMatrix, with_intercept: bool) -> Result<RegressionFit, ModelError> {
    let n = m.rows();
    let params = RegressionFit::parameter_count(with_intercept);
    if n < params {
        return Err(ModelError::Underdetermined { n, params });
    }

    let (alpha, rank, intercept) = if with_intercept {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
        let (ms, mv, my) = (mean(&m.screens), mean(&m.views), mean(&m.targets));
        let center = |v: &[f64], c: f64| v.iter().map(|x| x - c).collect::<Vec<_>>();
        let a = ColMatrix::from_columns(n, &[center(&m.screens, ms), center(&m.views, mv)]);
        let sol = solve_least_squares(&a, &center(&m.targets, my));
        let c = sol.coefficients;
        (
            [c[0], c[1]],
            sol.rank + 1,
            Some(my - c[0] * ms - c[1] * mv),
        )
    } else {
        let a = ColMatrix::from_columns(n, &[m.screens.clone(), m.views.clone()]);
        let sol = solve_least_squares(&a, &m.targets);
        ([sol.coefficients[0], sol.coefficients[1]], sol.rank, None)
    };

    let mut fit = RegressionFit {
        t: m.t,
        n,
        rank,
        with_intercept,
        alpha_screens: alpha[0],
        alpha_views: alpha[1],
        intercept,
        r_squared: f64::NAN,
    };
    fit.r_squared = r_squared(&fit, m)?;
    Ok(fit)
}

/// `a_screens * screens + a_views * cum_views (+ intercept)`.
pub fn predict(fit: &RegressionFit, screens: f64, cum_views: f64) -> f64 {
    fit.alpha_screens * screens + fit.alpha_views * cum_views + fit.intercept.unwrap_or(0.0)
}

/// `1 − SS_res / SS_tot`; SS_tot is taken about the mean when the fit has an
/// intercept and about zero otherwise.
pub fn r_squared(fit: &RegressionFit, m: &DesignMatrix) -> Result<f64, ModelError> {
    if m.is_empty() {
        return Err(ModelError::Argument("R² of an empty design matrix".into()));
    }
    let fitted: Vec<f64> = (0..m.rows())
        .map(|i| predict(fit, m.screens[i], m.views[i]))
        .collect();
    coefficient_of_determination(&m.targets, &fitted, fit.intercept.is_some())
}

/// R² of arbitrary predictions against targets.
pub fn coefficient_of_determination(targets: &[f64], predictions: &[f64], centered: bool) -> Result<f64, ModelError> {
    if targets.len() != predictions.len() {
        return Err(ModelError::Argument(format!(
            "{} targets but {} predictions",
            targets.len(),
            predictions.len()
        )));
    }
    if targets.is_empty() {
        return Err(ModelError::Argument("R² of no observations".into()));
    }
    let center = if centered {
        targets.iter().sum::<f64>() / targets.len() as f64
    } else {
        0.0
    };
    let ss_tot: f64 = targets.iter().map(|y| (y - center).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(ModelError::DegenerateTarget);
    }
    let ss_res: f64 = targets
        .iter()
        .zip(predictions)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Leave-one-out predictions at day `t`: for each film, refit without it and
/// predict it. Output is in dataset order.
pub fn loocv_predictions(d: &Dataset, t: i32, with_intercept: bool) -> Result<Vec<f64>, ModelError> {
    let m = build_design_matrix(d, t)?;
    loocv_on_matrix(&m, with_intercept)
}

pub fn loocv_on_matrix(m: &DesignMatrix, with_intercept: bool) -> Result<Vec<f64>, ModelError> {
    let params = RegressionFit::parameter_count(with_intercept);
    if m.rows() < params + 1 {
        return Err(ModelError::Fold {
            fold: 0,
            source: Box::new(ModelError::Underdetermined {
                n: m.rows().saturating_sub(1),
                params,
            }),
        });
    }
    (0..m.rows())
        .into_par_iter()
        .map(|i| {
            let fit = fit_ols(&m.without_row(i), with_intercept).map_err(|e| ModelError::Fold {
                fold: i,
                source: Box::new(e),
            })?;
            Ok(predict(&fit, m.screens[i], m.views[i]))
        })
        .collect()
}

/// `|y − p| / y` elementwise.
pub fn relative_errors(y: &[f64], p: &[f64]) -> Result<Vec<f64>, ModelError> {
    if y.len() != p.len() {
        return Err(ModelError::Argument(format!(
            "{} revenues but {} predictions",
            y.len(),
            p.len()
        )));
    }
    y.iter()
        .zip(p)
        .map(|(&y, &p)| {
            if y > 0.0 {
                Ok((y - p).abs() / y)
            } else {
                Err(ModelError::Argument(format!("revenue {y} is not positive")))
            }
        })
        .collect()
}

fn check_range(d: &Dataset, range: OffsetRange) -> Result<(), ModelError> {
    if range.start < d.window_start || range.end > 0 {
        return Err(ModelError::Argument(format!(
            "day range {range} outside [{}, 0]",
            d.window_start
        )));
    }
    Ok(())
}

/// In-sample R² of the model fitted at each day of `range`, in increasing `t`.
pub fn r2_evolution(d: &Dataset, range: OffsetRange, with_intercept: bool) -> Result<Vec<(i32, f64)>, ModelError> {
    Ok(fits_over(d, range, with_intercept)?
        .into_iter()
        .map(|f| (f.t, f.r_squared))
        .collect())
}

/// The fitted model of every day in `range`, in increasing `t`.
pub fn fits_over(d: &Dataset, range: OffsetRange, with_intercept: bool) -> Result<Vec<RegressionFit>, ModelError> {
    check_range(d, range)?;
    range
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|t| {
            build_design_matrix(d, t)
                .and_then(|m| fit_ols(&m, with_intercept))
                .map_err(|e| e.at_day(t))
        })
        .collect()
}

/// R² of the leave-one-out predictions at each day of `range`.
pub fn loocv_r2_evolution(d: &Dataset, range: OffsetRange, with_intercept: bool) -> Result<Vec<(i32, f64)>, ModelError> {
    check_range(d, range)?;
    range
        .iter()
        .map(|t| {
            let m = build_design_matrix(d, t).map_err(|e| e.at_day(t))?;
            let p = loocv_on_matrix(&m, with_intercept).map_err(|e| e.at_day(t))?;
            coefficient_of_determination(&m.targets, &p, with_intercept)
                .map(|r2| (t, r2))
                .map_err(|e| e.at_day(t))
        })
        .collect()
}

/// Drops the `k` highest-grossing films. Ties go to the earlier release,
/// then the alphabetically first title. Remaining order is preserved.
pub fn exclude_top_grossing(d: &Dataset, k: usize) -> Result<Dataset, ModelError> {
    if k >= d.len() {
        return Err(ModelError::Argument(format!(
            "cannot exclude {k} of {} films",
            d.len()
        )));
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&d.films[a].record, &d.films[b].record);
        rb.revenue
            .cmp(&ra.revenue)
            .then(ra.release_date.cmp(&rb.release_date))
            .then(ra.title.cmp(&rb.title))
    });
    let mut drop = vec![false; d.len()];
    for &i in &order[..k] {
        drop[i] = true;
    }
    Ok(Dataset {
        market: d.market,
        window_start: d.window_start,
        films: d
            .films
            .iter()
            .zip(drop)
            .filter(|(_, dropped)| !dropped)
            .map(|(f, _)| f.clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests;
