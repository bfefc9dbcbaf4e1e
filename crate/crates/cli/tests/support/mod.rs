//! Reference implementations for the acceptance checks. Deliberately naive:
//! explicit Gram matrices, dense elimination, per-fold refits.

use std::io::Write;

use boxcast_core::Dataset;

/// Least squares by the normal equations. Columns are scaled to unit norm
/// before forming the Gram system so that the oracle itself is accurate on
/// badly scaled inputs; the result is unscaled afterwards.
pub fn normal_equations(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = columns.len();
    let scales: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let scaled: Vec<Vec<f64>> = columns
        .iter()
        .zip(&scales)
        .map(|(c, s)| c.iter().map(|v| v / s).collect())
        .collect();
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = scaled[i].iter().zip(&scaled[j]).map(|(u, v)| u * v).sum();
        }
        a[i][p] = scaled[i].iter().zip(y).map(|(u, v)| u * v).sum();
    }
    let x = gauss(a);
    x.iter().zip(&scales).map(|(v, s)| v / s).collect()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let p = a.len();
    for k in 0..p {
        let pivot = (k..p)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .expect("nonempty");
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

/// Oracle coefficients as `(intercept, screens, views)`.
pub fn oracle_fit(screens: &[f64], views: &[f64], y: &[f64], with_intercept: bool) -> (f64, f64, f64) {
    let mut columns = vec![screens.to_vec(), views.to_vec()];
    if with_intercept {
        columns.insert(0, vec![1.0; y.len()]);
        let c = normal_equations(&columns, y);
        (c[0], c[1], c[2])
    } else {
        let c = normal_equations(&columns, y);
        (0.0, c[0], c[1])
    }
}

/// Screens, cumulative views over `[window_start, t]` and revenue, computed
/// directly from the dataset's daily counts.
pub fn features(d: &Dataset, t: i32) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let screens = d.films.iter().map(|f| f.record.screens as f64).collect();
    let views = d
        .films
        .iter()
        .map(|f| {
            (d.window_start..=t)
                .map(|o| f.views.daily().get(&o).copied().unwrap_or(0))
                .sum::<u64>() as f64
        })
        .collect();
    let revenue = d.films.iter().map(|f| f.record.revenue as f64).collect();
    (screens, views, revenue)
}

/// Leave-one-out predictions by refitting the oracle on every fold.
pub fn naive_loocv(screens: &[f64], views: &[f64], y: &[f64], with_intercept: bool) -> Vec<f64> {
    (0..y.len())
        .map(|held| {
            let keep = |v: &[f64]| -> Vec<f64> {
                v.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != held)
                    .map(|(_, x)| *x)
                    .collect()
            };
            let (c, a, b) = oracle_fit(&keep(screens), &keep(views), &keep(y), with_intercept);
            c + a * screens[held] + b * views[held]
        })
        .collect()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    let scale = got.abs().max(want.abs());
    if scale == 0.0 {
        0.0
    } else {
        (got - want).abs() / scale
    }
}

/// Prints the verdict line outside the test harness's output capture, then
/// fails the test if `ok` is false.
pub fn verdict(label: &str, ok: bool, detail: &str) {
    let line = format!("{} {label}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "{label}: {detail}");
}
