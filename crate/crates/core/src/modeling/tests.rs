use std::collections::BTreeMap;

use chrono::NaiveDate;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::data::{AlignedFilm, AlignmentMethod, ArticleUrl, FilmRecord, Market};
use crate::synthetic::{generate_dataset, SyntheticConfig};

/// Normal-equations least squares: forms XᵀX and Xᵀy explicitly and solves
/// with Gaussian elimination and partial pivoting. Test oracle only.
fn oracle_fit(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = columns.len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = columns[i].iter().zip(&columns[j]).map(|(u, v)| u * v).sum();
        }
        a[i][p] = columns[i].iter().zip(y).map(|(u, v)| u * v).sum();
    }
    for k in 0..p {
        let pivot = (k..p).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, pivot);
        for i in k + 1..p {
            let f = a[i][k] / a[k][k];
            for j in k..=p {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][p] - s) / a[i][i];
    }
    x
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2013, 6, 1).unwrap()
}

/// One film per row: (screens, revenue, daily counts from window_start).
fn dataset(rows: &[(u32, u64, Vec<u64>)], window_start: i32) -> Dataset {
    let films = rows
        .iter()
        .enumerate()
        .map(|(i, (screens, revenue, daily))| {
            let title = format!("Film {i}");
            let url = ArticleUrl::new("en", &title).unwrap();
            AlignedFilm {
                record: FilmRecord {
                    title,
                    market: Market::Us,
                    release_date: date() + chrono::Duration::days(i as i64),
                    revenue: *revenue,
                    screens: *screens,
                },
                views: PageviewSeries::from_counts(url.clone(), date(), window_start, daily).unwrap(),
                article_url: url,
                alignment_method: AlignmentMethod::Automatic,
            }
        })
        .collect();
    Dataset {
        market: Market::Us,
        films,
        window_start,
    }
}

fn matrix(screens: &[f64], views: &[f64], targets: &[f64]) -> DesignMatrix {
    DesignMatrix::new(0, screens.to_vec(), views.to_vec(), targets.to_vec()).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DesignMatrix {
    let screens: Vec<f64> = (0..n).map(|_| rng.gen_range(50.0..4000.0)).collect();
    let views: Vec<f64> = (0..n).map(|_| rng.gen_range(1e3..5e5)).collect();
    let targets: Vec<f64> = screens
        .iter()
        .zip(&views)
        .map(|(s, v)| (1e6 + 2500.0 * s + 30.0 * v) * rng.gen_range(0.5..1.5))
        .collect();
    matrix(&screens, &views, &targets)
}

// cumulative_views

#[test]
fn cumulative_views_of_zero_series_is_zero() {
    let s = PageviewSeries::from_counts(ArticleUrl::new("en", "Z").unwrap(), date(), -10, &[0; 11]).unwrap();
    assert_eq!(cumulative_views(&s, -10, 0).unwrap(), 0);
    assert_eq!(cumulative_views(&s, -4, -2).unwrap(), 0);
}

#[test]
fn cumulative_views_sums_window() {
    let daily = BTreeMap::from([(-3, 2u64), (-2, 5), (-1, 0), (0, 4)]);
    let s = PageviewSeries::new(
        ArticleUrl::new("en", "X").unwrap(),
        date(),
        OffsetRange::new(-3, 0).unwrap(),
        daily.clone(),
    )
    .unwrap();
    let mut oracle = 0;
    for (offset, count) in &daily {
        if (-3..=-1).contains(offset) {
            oracle += count;
        }
    }
    assert_eq!(oracle, 7);
    assert_eq!(cumulative_views(&s, -3, -1).unwrap(), oracle);
    assert_eq!(cumulative_views(&s, -2, -2).unwrap(), 5);
}

#[test]
fn cumulative_views_errors() {
    let s = PageviewSeries::from_counts(ArticleUrl::new("en", "X").unwrap(), date(), -3, &[1; 4]).unwrap();
    assert!(matches!(cumulative_views(&s, -1, -2), Err(ModelError::Argument(_))));
    let err = cumulative_views(&s, -5, 0).unwrap_err();
    assert!(matches!(err, ModelError::Coverage { .. }));
    assert!(err.to_string().contains("[-5, 0]"), "{err}");
}

#[test]
fn sparse_series_counts_missing_days_as_zero() {
    let daily = BTreeMap::from([(-5, 3u64), (0, 4)]);
    let s = PageviewSeries::new(
        ArticleUrl::new("en", "X").unwrap(),
        date(),
        OffsetRange::new(-5, 0).unwrap(),
        daily,
    )
    .unwrap();
    assert_eq!(cumulative_views(&s, -5, -1).unwrap(), 3);
    assert_eq!(cumulative_views(&s, -5, 0).unwrap(), 7);
}

// build_design_matrix

#[test]
fn design_matrix_assembles_rows() {
    let d = dataset(&[(100, 1000, vec![4, 6]), (200, 2500, vec![10, 20])], -1);
    let m = build_design_matrix(&d, 0).unwrap();
    assert_eq!(m.row(0), [100.0, 10.0]);
    assert_eq!(m.row(1), [200.0, 30.0]);
    assert_eq!(m.targets, vec![1000.0, 2500.0]);
    assert_eq!(m.t, 0);

    let first = build_design_matrix(&d, -1).unwrap();
    assert_eq!(first.views, vec![4.0, 10.0]);
}

#[test]
fn design_matrix_of_empty_dataset_has_no_rows() {
    let d = dataset(&[], -5);
    let m = build_design_matrix(&d, -2).unwrap();
    assert_eq!(m.rows(), 0);
    assert!(matches!(fit_ols(&m, true), Err(ModelError::Underdetermined { n: 0, params: 3 })));
}

#[test]
fn design_matrix_reports_short_coverage_and_bad_days() {
    let mut d = dataset(&[(1, 1, vec![1; 6]), (1, 1, vec![1; 6])], -5);
    d.window_start = -8;
    let err = build_design_matrix(&d, -2).unwrap_err();
    match err {
        ModelError::Coverage { films, .. } => assert_eq!(films.len(), 2),
        other => panic!("unexpected {other:?}"),
    }
    let d = dataset(&[(1, 1, vec![1; 6])], -5);
    assert!(matches!(build_design_matrix(&d, 1), Err(ModelError::Argument(_))));
    assert!(matches!(build_design_matrix(&d, -6), Err(ModelError::Argument(_))));
}

// fit_ols

#[test]
fn exact_recovery_without_intercept() {
    let x1 = [3.0, 7.0, 1.0, 12.0, 5.5];
    let x2 = [2.0, -1.0, 8.0, 4.0, 0.25];
    let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 * a + 3.0 * b).collect();
    let fit = fit_ols(&matrix(&x1, &x2, &y), false).unwrap();
    assert!((fit.alpha_screens - 2.0).abs() < 1e-9);
    assert!((fit.alpha_views - 3.0).abs() < 1e-9);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert_eq!(fit.rank, 2);
    assert_eq!(fit.intercept, None);
}

#[test]
fn zero_views_column_gives_min_norm() {
    let x1 = [1.0, 2.0, 3.0, 4.0];
    let y: Vec<f64> = x1.iter().map(|v| 5.0 * v).collect();
    let fit = fit_ols(&matrix(&x1, &[0.0; 4], &y), false).unwrap();
    assert!((fit.alpha_screens - 5.0).abs() < 1e-12);
    assert_eq!(fit.alpha_views, 0.0);
    assert_eq!(fit.rank, 1);
}

#[test]
fn matches_normal_equations_with_intercept() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let m = random_matrix(&mut rng, 50);
    let fit = fit_ols(&m, true).unwrap();
    let want = oracle_fit(&[vec![1.0; 50], m.screens.clone(), m.views.clone()], &m.targets);
    assert!(rel_close(fit.intercept.unwrap(), want[0], 1e-8), "{fit} vs {want:?}");
    assert!(rel_close(fit.alpha_screens, want[1], 1e-8), "{fit} vs {want:?}");
    assert!(rel_close(fit.alpha_views, want[2], 1e-8), "{fit} vs {want:?}");
    assert_eq!(fit.rank, 3);
}

#[test]
fn fit_errors() {
    let m = matrix(&[1.0, 2.0], &[3.0, 4.0], &[1.0, 2.0]);
    assert!(matches!(fit_ols(&m, true), Err(ModelError::Underdetermined { n: 2, params: 3 })));
    let m = matrix(&[1.0, 2.0, 3.0], &[3.0, 4.0, 1.0], &[7.0; 3]);
    assert!(matches!(fit_ols(&m, true), Err(ModelError::DegenerateTarget)));
    // Uncentered total is nonzero, so a through-origin fit of the same data is fine.
    assert!(fit_ols(&m, false).is_ok());
}

#[test]
fn fit_serializes_expected_fields() {
    let fit = RegressionFit {
        t: -7,
        n: 10,
        rank: 3,
        with_intercept: true,
        alpha_screens: 1.5,
        alpha_views: 0.25,
        intercept: Some(-3.0),
        r_squared: 0.5,
    };
    let v: serde_json::Value = serde_json::from_str(&fit.to_json()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        vec!["alpha_screens", "alpha_views", "intercept", "n", "r_squared", "rank", "t", "with_intercept"]
    );
    let no_intercept = RegressionFit { intercept: None, with_intercept: false, ..fit };
    let v: serde_json::Value = serde_json::from_str(&no_intercept.to_json()).unwrap();
    assert!(v.get("intercept").is_none());
    assert_eq!(v["with_intercept"], false);
}

// predict

#[test]
fn predict_examples() {
    let fit = RegressionFit {
        t: 0,
        n: 5,
        rank: 2,
        with_intercept: false,
        alpha_screens: 2.0,
        alpha_views: 3.0,
        intercept: None,
        r_squared: 1.0,
    };
    assert_eq!(predict(&fit, 10.0, 10.0), 50.0);
    let with_c = RegressionFit { intercept: Some(7.0), with_intercept: true, ..fit.clone() };
    assert_eq!(predict(&with_c, 0.0, 0.0), 7.0);

    let x1 = [3.0, 7.0, 1.0];
    let x2 = [2.0, -1.0, 8.0];
    let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 * a + 3.0 * b).collect();
    let exact = fit_ols(&matrix(&x1, &x2, &y), false).unwrap();
    for i in 0..3 {
        assert!((predict(&exact, x1[i], x2[i]) - y[i]).abs() < 1e-9);
    }
}

// r_squared

#[test]
fn intercept_only_fit_scores_zero() {
    let y = [3.0, 9.0, 4.0, 1.0];
    let mean = y.iter().sum::<f64>() / 4.0;
    let fit = RegressionFit {
        t: 0,
        n: 4,
        rank: 1,
        with_intercept: true,
        alpha_screens: 0.0,
        alpha_views: 0.0,
        intercept: Some(mean),
        r_squared: 0.0,
    };
    let m = matrix(&[1.0, 5.0, 2.0, 8.0], &[0.5, 0.1, 3.0, 2.0], &y);
    assert_eq!(r_squared(&fit, &m).unwrap(), 0.0);
}

#[test]
fn r_squared_six_point_hand_computation() {
    let screens = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let views = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
    let y = [5.0, 4.0, 11.0, 9.0, 17.0, 16.0];
    let fit = RegressionFit {
        t: 0,
        n: 6,
        rank: 3,
        with_intercept: true,
        alpha_screens: 1.0,
        alpha_views: 2.0,
        intercept: Some(0.5),
        r_squared: f64::NAN,
    };
    // fitted: 5.5, 4.5, 11.5, 10.5, 17.5, 16.5 → residuals -0.5,-0.5,-0.5,-1.5,-0.5,-0.5
    let ss_res = 0.25 * 5.0 + 2.25;
    // mean 62/6; deviations squared summed by hand
    let mean = 62.0 / 6.0;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let want = 1.0 - ss_res / ss_tot;
    let got = r_squared(&fit, &matrix(&screens, &views, &y)).unwrap();
    assert!((got - want).abs() < 1e-15, "{got} vs {want}");

    let origin = RegressionFit { intercept: None, with_intercept: false, ..fit };
    let ss_tot0: f64 = y.iter().map(|v| v * v).sum();
    let fitted0 = [5.0, 4.0, 11.0, 10.0, 17.0, 16.0];
    let ss_res0: f64 = y.iter().zip(fitted0).map(|(a, b)| (a - b) * (a - b)).sum();
    let got0 = r_squared(&origin, &matrix(&screens, &views, &y)).unwrap();
    assert!((got0 - (1.0 - ss_res0 / ss_tot0)).abs() < 1e-15);
}

#[test]
fn r_squared_rejects_empty_and_constant() {
    let fit = fit_ols(&matrix(&[1.0, 2.0, 4.0], &[1.0, 0.0, 1.0], &[1.0, 2.0, 3.0]), true).unwrap();
    assert!(r_squared(&fit, &matrix(&[], &[], &[])).is_err());
    assert_eq!(
        r_squared(&fit, &matrix(&[1.0, 2.0], &[1.0, 1.0], &[4.0, 4.0])),
        Err(ModelError::DegenerateTarget)
    );
}

// loocv

#[test]
fn loocv_on_exact_data_reproduces_targets() {
    let rows = [(10u32, vec![1u64, 2]), (20, vec![5, 1]), (35, vec![2, 2]), (7, vec![9, 9])];
    let data: Vec<(u32, u64, Vec<u64>)> = rows
        .iter()
        .map(|(s, daily)| (*s, 2 * *s as u64 + 3 * daily.iter().sum::<u64>(), daily.clone()))
        .collect();
    let d = dataset(&data, -1);
    let p = loocv_predictions(&d, 0, false).unwrap();
    for (pi, yi) in p.iter().zip(d.revenues()) {
        assert!((pi - yi).abs() < 1e-9 * yi, "{pi} vs {yi}");
    }
}

#[test]
fn loocv_needs_one_spare_row() {
    let d = dataset(&[(1, 5, vec![1]), (2, 7, vec![3]), (3, 8, vec![2])], 0);
    assert!(matches!(loocv_predictions(&d, 0, true), Err(ModelError::Fold { fold: 0, .. })));
    let d = dataset(&[(1, 5, vec![1]), (2, 7, vec![3])], 0);
    assert!(matches!(loocv_predictions(&d, 0, false), Err(ModelError::Fold { .. })));
}

/// Rebuilds every fold by hand and solves it with the normal-equations oracle.
fn naive_loocv(m: &DesignMatrix, with_intercept: bool) -> Vec<f64> {
    let n = m.rows();
    (0..n)
        .map(|hold| {
            let keep: Vec<usize> = (0..n).filter(|&i| i != hold).collect();
            let mut columns = Vec::new();
            if with_intercept {
                columns.push(vec![1.0; keep.len()]);
            }
            columns.push(keep.iter().map(|&i| m.screens[i]).collect());
            columns.push(keep.iter().map(|&i| m.views[i]).collect());
            let y: Vec<f64> = keep.iter().map(|&i| m.targets[i]).collect();
            let beta = oracle_fit(&columns, &y);
            let x = if with_intercept {
                vec![1.0, m.screens[hold], m.views[hold]]
            } else {
                vec![m.screens[hold], m.views[hold]]
            };
            x.iter().zip(&beta).map(|(a, b)| a * b).sum()
        })
        .collect()
}

#[test]
fn loocv_matches_naive_refit() {
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    for with_intercept in [true, false] {
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 20);
            let got = loocv_on_matrix(&m, with_intercept).unwrap();
            let want = naive_loocv(&m, with_intercept);
            for (g, w) in got.iter().zip(&want) {
                assert!(rel_close(*g, *w, 1e-9), "{g} vs {w}");
            }
        }
    }
}

// relative_errors

#[test]
fn relative_error_examples() {
    // Over-predicting by one million: 0.1 on a ten-million film, but 10 (not 9)
    // on a hundred-thousand film. 9.0 corresponds to a prediction of 1,000,000.
    let e = relative_errors(
        &[10_000_000.0, 100_000.0, 100_000.0, 42.0],
        &[11_000_000.0, 1_100_000.0, 1_000_000.0, 42.0],
    )
    .unwrap();
    assert_eq!(e, vec![0.1, 10.0, 9.0, 0.0]);
    assert!(relative_errors(&[1.0], &[1.0, 2.0]).is_err());
    assert!(relative_errors(&[0.0], &[1.0]).is_err());
}

// r2_evolution

#[test]
fn constant_views_give_constant_r2() {
    // Views only on the first day, so every cumulative column is identical.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<(u32, u64, Vec<u64>)> = (0..12)
        .map(|_| {
            let mut daily = vec![0u64; 10];
            daily[0] = rng.gen_range(10..1000);
            (rng.gen_range(10..500), rng.gen_range(1000..100_000), daily)
        })
        .collect();
    let d = dataset(&rows, -9);
    let series = r2_evolution(&d, OffsetRange::new(-9, 0).unwrap(), true).unwrap();
    assert_eq!(series.len(), 10);
    for (_, r2) in &series {
        assert_eq!(*r2, series[0].1);
    }
}

#[test]
fn late_accruing_views_raise_r2() {
    // Revenue is proportional to views accrued in the final week only; early
    // traffic is unrelated noise.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<(u32, u64, Vec<u64>)> = (0..40)
        .map(|_| {
            let mut daily: Vec<u64> = (0..50).map(|_| rng.gen_range(0..2000)).collect();
            let mut late = 0;
            for v in daily.iter_mut().skip(43) {
                *v = rng.gen_range(0..20_000);
                late += *v;
            }
            (rng.gen_range(100..3000), 50 * late + 1, daily)
        })
        .collect();
    let d = dataset(&rows, -49);
    let series = r2_evolution(&d, OffsetRange::new(-30, -1).unwrap(), true).unwrap();
    let at = |t: i32| series.iter().find(|(s, _)| *s == t).unwrap().1;
    assert!(at(-1) > at(-30), "R²(-1)={} R²(-30)={}", at(-1), at(-30));
    assert!(series.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn single_day_range() {
    let d = generate_dataset(&SyntheticConfig { films: 20, ..Default::default() }, 1);
    let series = r2_evolution(&d, OffsetRange::new(-3, -3).unwrap(), true).unwrap();
    assert_eq!(series.len(), 1);
    assert!(r2_evolution(&d, OffsetRange::new(-60, -3).unwrap(), true).is_err());
}

#[test]
fn loocv_r2_series_is_below_in_sample() {
    let d = generate_dataset(&SyntheticConfig { films: 60, ..Default::default() }, 9);
    let range = OffsetRange::new(-5, -1).unwrap();
    let in_sample = r2_evolution(&d, range, true).unwrap();
    let held_out = loocv_r2_evolution(&d, range, true).unwrap();
    for ((t1, a), (t2, b)) in in_sample.iter().zip(&held_out) {
        assert_eq!(t1, t2);
        assert!(b <= a);
    }
}

// exclude_top_grossing

#[test]
fn exclusion_examples() {
    let d = dataset(&[(1, 5, vec![1]), (1, 9, vec![1]), (1, 1, vec![1])], 0);
    assert_eq!(exclude_top_grossing(&d, 0).unwrap(), d);
    let out = exclude_top_grossing(&d, 1).unwrap();
    let revenues: Vec<u64> = out.films.iter().map(|f| f.record.revenue).collect();
    assert_eq!(revenues, vec![5, 1]);
    assert!(exclude_top_grossing(&d, 3).is_err());
}

#[test]
fn exclusion_tie_goes_to_earlier_release() {
    // dataset() assigns release dates in row order, so row 1 is earlier than row 2
    let d = dataset(&[(1, 3, vec![1]), (1, 9, vec![1]), (1, 9, vec![1])], 0);
    let out = exclude_top_grossing(&d, 1).unwrap();
    let titles: Vec<&str> = out.films.iter().map(|f| f.record.title.as_str()).collect();
    assert_eq!(titles, vec!["Film 0", "Film 2"]);
}

// properties

fn fitted_values(fit: &RegressionFit, m: &DesignMatrix) -> Vec<f64> {
    (0..m.rows()).map(|i| predict(fit, m.screens[i], m.views[i])).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_equivalence(seed in any::<u64>(), n in 5usize..200, with_intercept in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n);
        let fit = fit_ols(&m, with_intercept).unwrap();
        let mut columns = vec![m.screens.clone(), m.views.clone()];
        if with_intercept {
            columns.insert(0, vec![1.0; n]);
        }
        let want = oracle_fit(&columns, &m.targets);
        let got: Vec<f64> = if with_intercept {
            vec![fit.intercept.unwrap(), fit.alpha_screens, fit.alpha_views]
        } else {
            vec![fit.alpha_screens, fit.alpha_views]
        };
        for (g, w) in got.iter().zip(&want) {
            prop_assert!(rel_close(*g, *w, 1e-8), "{} vs {}", g, w);
        }
    }

    #[test]
    fn target_scale_equivariance(seed in any::<u64>(), c in 0.001f64..1000.0, with_intercept in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, 25);
        let scaled = DesignMatrix { targets: m.targets.iter().map(|y| c * y).collect(), ..m.clone() };
        let (a, b) = (fit_ols(&m, with_intercept).unwrap(), fit_ols(&scaled, with_intercept).unwrap());
        prop_assert!(rel_close(b.alpha_screens, c * a.alpha_screens, 1e-12));
        prop_assert!(rel_close(b.alpha_views, c * a.alpha_views, 1e-12));
        prop_assert!((a.r_squared - b.r_squared).abs() < 1e-12);
        let (pa, pb) = (loocv_on_matrix(&m, with_intercept).unwrap(), loocv_on_matrix(&scaled, with_intercept).unwrap());
        let ea = relative_errors(&m.targets, &pa).unwrap();
        let eb = relative_errors(&scaled.targets, &pb).unwrap();
        for i in 0..pa.len() {
            prop_assert!(rel_close(pb[i], c * pa[i], 1e-12));
            prop_assert!((ea[i] - eb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn feature_scale_equivariance(seed in any::<u64>(), c in 0.001f64..1000.0, column in 0usize..2, with_intercept in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, 25);
        let mut scaled = m.clone();
        let col = if column == 0 { &mut scaled.screens } else { &mut scaled.views };
        col.iter_mut().for_each(|x| *x *= c);
        let (a, b) = (fit_ols(&m, with_intercept).unwrap(), fit_ols(&scaled, with_intercept).unwrap());
        let (ca, cb) = if column == 0 { (a.alpha_screens, b.alpha_screens) } else { (a.alpha_views, b.alpha_views) };
        prop_assert!(rel_close(cb, ca / c, 1e-10));
        prop_assert!((a.r_squared - b.r_squared).abs() < 1e-10);
        for (fa, fb) in fitted_values(&a, &m).iter().zip(fitted_values(&b, &scaled)) {
            prop_assert!(rel_close(*fa, fb, 1e-10));
        }
    }

    #[test]
    fn fitted_model_beats_perturbed_coefficients(seed in any::<u64>(), d1 in -1.0f64..1.0, d2 in -1.0f64..1.0, with_intercept in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, 30);
        let fit = fit_ols(&m, with_intercept).unwrap();
        let other = RegressionFit {
            alpha_screens: fit.alpha_screens * (1.0 + 0.1 * d1),
            alpha_views: fit.alpha_views * (1.0 + 0.1 * d2),
            ..fit.clone()
        };
        prop_assert!(fit.r_squared + 1e-12 >= r_squared(&other, &m).unwrap());
    }

    #[test]
    fn cumulative_views_monotone(counts in proptest::collection::vec(0u64..10_000, 1..60)) {
        let start = -(counts.len() as i32) + 1;
        let s = PageviewSeries::from_counts(ArticleUrl::new("en", "M").unwrap(), date(), start, &counts).unwrap();
        let mut last = 0;
        for t in start..=0 {
            let v = cumulative_views(&s, start, t).unwrap();
            prop_assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn permuting_rows_permutes_outputs(seed in any::<u64>()) {
        let d = generate_dataset(&SyntheticConfig { films: 15, window_start: -10, ..Default::default() }, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut order: Vec<usize> = (0..d.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let shuffled = Dataset { films: order.iter().map(|&i| d.films[i].clone()).collect(), ..d.clone() };
        let (p, q) = (loocv_predictions(&d, -3, true).unwrap(), loocv_predictions(&shuffled, -3, true).unwrap());
        for (k, &i) in order.iter().enumerate() {
            prop_assert!(rel_close(q[k], p[i], 1e-9));
        }
        let range = OffsetRange::new(-10, -1).unwrap();
        let (ra, rb) = (r2_evolution(&d, range, true).unwrap(), r2_evolution(&shuffled, range, true).unwrap());
        for (a, b) in ra.iter().zip(&rb) {
            prop_assert_eq!(a.0, b.0);
            prop_assert!((a.1 - b.1).abs() < 1e-12);
        }
    }
}
