//! Least squares by Householder QR with column pivoting.
//!
//! For a rank-deficient design the complete orthogonal decomposition
//! `A P = Q [T 0; 0 0] Zᵀ` gives the minimum-norm solution. Matrices are
//! dense, column-major and small (two or three columns), so nothing here is
//! blocked or vectorised.

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ColMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            assert_eq!(col.len(), rows, "column length must equal row count");
            data.extend_from_slice(col);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(a * self.rows + r, b * self.rows + r);
            }
        }
    }
}

/// One elementary reflector `I - tau v vᵀ` acting on rows `offset..`,
/// with `v[0] = 1` implied.
#[derive(Debug, Clone)]
struct Reflector {
    offset: usize,
    tail: Vec<f64>,
    tau: f64,
}

impl Reflector {
    /// Builds the reflector zeroing `x[1..]` and returns it with the new `x[0]`.
    fn annihilate(x: &[f64], offset: usize) -> (Self, f64) {
        let alpha = x[0];
        let tail_norm = norm(&x[1..]);
        if tail_norm == 0.0 {
            return (
                Self {
                    offset,
                    tail: vec![0.0; x.len() - 1],
                    tau: 0.0,
                },
                alpha,
            );
        }
        let beta = -alpha.signum_or_one() * alpha.hypot(tail_norm);
        let scale = 1.0 / (alpha - beta);
        let tail = x[1..].iter().map(|v| v * scale).collect();
        let tau = (beta - alpha) / beta;
        (Self { offset, tail, tau }, beta)
    }

    fn apply(&self, y: &mut [f64]) {
        if self.tau == 0.0 {
            return;
        }
        let seg = &mut y[self.offset..];
        let dot = seg[0] + self.tail.iter().zip(&seg[1..]).map(|(v, y)| v * y).sum::<f64>();
        let s = self.tau * dot;
        seg[0] -= s;
        for (y, v) in seg[1..].iter_mut().zip(&self.tail) {
            *y -= s * v;
        }
    }
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    // Scaled to avoid overflow on squared revenues.
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolution {
    pub coefficients: Vec<f64>,
    pub rank: usize,
}

/// Relative threshold on `|R_kk| / |R_00|` below which a column is treated
/// as dependent.
pub fn rank_tolerance(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * 10.0
}

/// Minimum-norm minimiser of `‖A x − b‖₂`.
pub fn solve_least_squares(a: &ColMatrix, b: &[f64]) -> LeastSquaresSolution {
    assert_eq!(a.rows(), b.len(), "right-hand side length must equal row count");
    let (m, n) = (a.rows(), a.cols());
    let steps = m.min(n);
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors = Vec::with_capacity(steps);
    let mut diag = Vec::with_capacity(steps);

    for k in 0..steps {
        let pivot = (k..n)
            .max_by(|&i, &j| {
                norm(&r.col(i)[k..])
                    .partial_cmp(&norm(&r.col(j)[k..]))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // ties keep the leftmost column
                    .then(j.cmp(&i))
            })
            .expect("k < n");
        r.swap_cols(k, pivot);
        perm.swap(k, pivot);

        let (h, beta) = Reflector::annihilate(&r.col(k)[k..], k);
        {
            let col = r.col_mut(k);
            col[k] = beta;
            col[k + 1..].iter_mut().for_each(|v| *v = 0.0);
        }
        for j in k + 1..n {
            h.apply(r.col_mut(j));
        }
        diag.push(beta);
        reflectors.push(h);
    }

    let lead = diag.first().map_or(0.0, |d| d.abs());
    let tol = rank_tolerance(m, n) * lead;
    let rank = if lead == 0.0 {
        0
    } else {
        diag.iter().take_while(|d| d.abs() > tol).count()
    };

    let mut qtb = b.to_vec();
    for h in &reflectors {
        h.apply(&mut qtb);
    }

    let mut w = vec![0.0; n];
    if rank == n {
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| r.get(i, j) * w[j]).sum();
            w[i] = (qtb[i] - s) / r.get(i, i);
        }
    } else if rank > 0 {
        // [R11 R12]ᵀ = Z [T; 0]; then w = Z [T⁻ᵀ c; 0].
        let mut trap_t = ColMatrix {
            rows: n,
            cols: rank,
            data: vec![0.0; n * rank],
        };
        for i in 0..rank {
            for j in i..n {
                trap_t.col_mut(i)[j] = r.get(i, j);
            }
        }
        let mut z_reflectors = Vec::with_capacity(rank);
        for k in 0..rank {
            let (h, beta) = Reflector::annihilate(&trap_t.col(k)[k..], k);
            {
                let col = trap_t.col_mut(k);
                col[k] = beta;
                col[k + 1..].iter_mut().for_each(|v| *v = 0.0);
            }
            for j in k + 1..rank {
                h.apply(trap_t.col_mut(j));
            }
            z_reflectors.push(h);
        }
        // Tᵀ u = c, forward substitution; Tᵀ[i][j] = T[j][i].
        for i in 0..rank {
            let s: f64 = (0..i).map(|j| trap_t.get(j, i) * w[j]).sum();
            w[i] = (qtb[i] - s) / trap_t.get(i, i);
        }
        for h in z_reflectors.iter().rev() {
            h.apply(&mut w);
        }
    }

    let mut coefficients = vec![0.0; n];
    for (k, &col) in perm.iter().enumerate() {
        coefficients[col] = w[k];
    }
    LeastSquaresSolution { coefficients, rank }
}
