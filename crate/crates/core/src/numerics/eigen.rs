use crate::error::{PibtError, Result};

/// Dense symmetric matrix stored as its packed upper triangle (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    packed: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            packed: vec![0.0; order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from the upper triangle of `f(i, j)`, `i ≤ j`.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in i..order {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from a full square matrix, rejecting asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(PibtError::invalid("symmetric matrix rows must form a square"));
        }
        for i in 0..order {
            for j in 0..i {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(PibtError::invalid(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self::from_fn(order, |i, j| rows[i][j]))
    }

    /// Gram matrix `ΛᵀΛ` of the rows of `Λ`, accumulated exactly as sums of products.
    pub fn gram<R: AsRef<[f64]>>(order: usize, rows: &[R]) -> Self {
        let mut m = Self::zeros(order);
        for row in rows {
            let row = row.as_ref();
            debug_assert_eq!(row.len(), order);
            for i in 0..order {
                for j in i..order {
                    let k = m.index(i, j);
                    m.packed[k] += row[i] * row[j];
                }
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.order - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.packed[k] = value;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            order: self.order,
            packed: self.packed.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j)).collect())
            .collect()
    }

    fn tridiagonal(&self) -> Tridiagonal {
        tridiagonalize(self.to_dense())
    }
}

/// Symmetric tridiagonal form: `diag[i]` and `off[i]` couples `i` and `i+1`.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Householder reduction to tridiagonal form, eigenvalues only.
fn tridiagonalize(mut a: Vec<Vec<f64>>) -> Tridiagonal {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);

        // trailing block A ← A − 2vwᵀ − 2wvᵀ with p = Av, w = p − (vᵀp)v
        let m = n - k - 1;
        let p: Vec<f64> = (0..m)
            .map(|r| (0..m).map(|c| a[k + 1 + r][k + 1 + c] * v[c]).sum())
            .collect();
        let vp: f64 = v.iter().zip(&p).map(|(x, y)| x * y).sum();
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - vp * vi).collect();
        for r in 0..m {
            for c in 0..m {
                a[k + 1 + r][k + 1 + c] -= 2.0 * (v[r] * w[c] + w[r] * v[c]);
            }
        }
        a[k + 1][k] = alpha;
        a[k][k + 1] = alpha;
        for i in k + 2..n {
            a[i][k] = 0.0;
            a[k][i] = 0.0;
        }
    }
    Tridiagonal {
        diag: (0..n).map(|i| a[i][i]).collect(),
        off: (0..n.saturating_sub(1)).map(|i| a[i + 1][i]).collect(),
    }
}

impl Tridiagonal {
    /// Sturm count: number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let scale = self
            .off
            .iter()
            .chain(&self.diag)
            .fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
        let tiny = f64::EPSILON * scale * 1e-3;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.diag.len() {
            if i > 0 {
                let e = self.off[i - 1];
                q = self.diag[i] - x - e * e / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) * 4.0;
        (lo - pad, hi + pad)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
    fn kth_eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Smallest eigenvalue of a symmetric matrix (Householder tridiagonalization
/// followed by Sturm-sequence bisection). Negative eigenvalues are returned as-is.
pub fn min_eigenvalue(m: &SymmetricMatrix) -> f64 {
    assert!(m.order() > 0, "eigenvalue of an empty matrix");
    m.tridiagonal().kth_eigenvalue(0)
}

/// `(λ_min, λ_max)` of a symmetric matrix.
pub fn symmetric_eigenvalue_bounds(m: &SymmetricMatrix) -> (f64, f64) {
    assert!(m.order() > 0, "eigenvalue of an empty matrix");
    let t = m.tridiagonal();
    (t.kth_eigenvalue(0), t.kth_eigenvalue(m.order() - 1))
}
