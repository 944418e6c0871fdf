//! Dense row-major linear algebra: just enough for the samplers.
//!
//! Nothing here applies jitter or retries on its own; a failed factorization
//! is reported to the caller, which decides what to do.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

// Unused when std is linked (its inherent float methods take precedence).
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Symmetry tolerance for [`SpdMatrix`], relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative pivot threshold for [`lq_decompose`].
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: (rows, cols),
                got: (data.len(), 1),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(alloc::format!(
                "non-finite matrix entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "matrix rows",
                    expected: (rows.len(), cols),
                    got: (rows.len(), r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(l);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self' * other`.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "t_matmul dimension mismatch");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for t in 0..self.rows {
            let arow = self.row(t);
            let brow = other.row(t);
            for (i, &a) in arow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(brow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self * other'`.
    pub fn matmul_t(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "matmul_t dimension mismatch");
        Matrix::from_fn(self.rows, other.rows, |i, j| dot(self.row(i), other.row(j)))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `||self - other||_F / ||other||_F`.
    pub fn rel_frobenius_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        let num: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den = other.frobenius_norm();
        if den == 0.0 {
            num.sqrt()
        } else {
            num.sqrt() / den
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Leading `r x c` block.
    pub fn top_left(&self, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |i, j| self[(i, j)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An `m x k` (`m >= k`) lower-triangular matrix with strictly positive
/// diagonal. Used both for loading matrices and for square Cholesky factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular(Matrix);

impl LowerTriangular {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows < m.cols {
            return Err(Error::DimensionMismatch {
                what: "lower-triangular matrix needs rows >= cols",
                expected: (m.cols, m.cols),
                got: m.shape(),
            });
        }
        for i in 0..m.cols {
            for j in i + 1..m.cols {
                if m[(i, j)] != 0.0 {
                    return Err(Error::Domain(alloc::format!(
                        "entry ({i}, {j}) above the diagonal is {}",
                        m[(i, j)]
                    )));
                }
            }
            if !(m[(i, i)] > 0.0) {
                return Err(Error::Domain(alloc::format!(
                    "diagonal entry ({i}, {i}) is {}, must be > 0",
                    m[(i, i)]
                )));
            }
        }
        Ok(LowerTriangular(m))
    }

    pub(crate) fn new_unchecked(m: Matrix) -> Self {
        debug_assert!(LowerTriangular::new(m.clone()).is_ok());
        LowerTriangular(m)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows
    }

    pub fn cols(&self) -> usize {
        self.0.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.0[(i, i)]
    }

    /// The structurally non-zero part of row `i`: the first `min(i + 1, k)` entries.
    pub fn row_head(&self, i: usize) -> &[f64] {
        let len = (i + 1).min(self.0.cols);
        &self.0.row(i)[..len]
    }

    /// `L L'`.
    pub fn gram(&self) -> Matrix {
        self.0.matmul_t(&self.0)
    }

    pub fn log_det(&self) -> f64 {
        (0..self.0.cols).map(|i| self.0[(i, i)].ln()).sum()
    }
}

/// A square matrix that is symmetric to [`SYMMETRY_TOL`] and claimed to be
/// positive definite. Positive definiteness is verified by [`cholesky`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(Matrix);

impl SpdMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                what: "symmetric matrix must be square",
                expected: (m.rows, m.rows),
                got: m.shape(),
            });
        }
        let tol = SYMMETRY_TOL * m.max_abs();
        for i in 0..m.rows {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::Domain(alloc::format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SpdMatrix(m))
    }

    /// Averages `m` with its transpose.
    pub fn symmetrize(m: Matrix) -> Self {
        assert!(m.is_square());
        let n = m.rows;
        SpdMatrix(Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Adds `delta` to every diagonal entry.
    pub fn add_ridge(&self, delta: f64) -> SpdMatrix {
        let mut m = self.0.clone();
        for i in 0..m.rows {
            m[(i, i)] += delta;
        }
        SpdMatrix(m)
    }
}

/// Cholesky factor `G` with `G G' = A`.
pub fn cholesky(a: &SpdMatrix) -> Result<LowerTriangular> {
    let n = a.dim();
    let a = &a.0;
    let mut g = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for l in 0..j {
            d -= g[(j, l)] * g[(j, l)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        g[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for l in 0..j {
                s -= g[(i, l)] * g[(j, l)];
            }
            g[(i, j)] = s / djj;
        }
    }
    Ok(LowerTriangular(g))
}

/// Solves `G x = b` for square lower-triangular `G`.
pub fn forward_solve(g: &LowerTriangular, b: &[f64]) -> Vec<f64> {
    let n = g.cols();
    assert_eq!(g.rows(), n);
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in 0..n {
        let row = g.0.row(i);
        let s = dot(&row[..i], &x[..i]);
        x[i] = (x[i] - s) / row[i];
    }
    x
}

/// Solves `G' x = b` for square lower-triangular `G`.
pub fn back_solve_transposed(g: &LowerTriangular, b: &[f64]) -> Vec<f64> {
    let n = g.cols();
    assert_eq!(g.rows(), n);
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for l in i + 1..n {
            s -= g.0[(l, i)] * x[l];
        }
        x[i] = s / g.0[(i, i)];
    }
    x
}

/// Solves `A x = b` given the Cholesky factor of `A`.
pub fn cholesky_solve(g: &LowerTriangular, b: &[f64]) -> Vec<f64> {
    back_solve_transposed(g, &forward_solve(g, b))
}

/// `A^{-1}` from the Cholesky factor of `A`, column by column.
pub fn cholesky_inverse(g: &LowerTriangular) -> SpdMatrix {
    let n = g.cols();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(g, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    SpdMatrix::symmetrize(inv)
}

/// LQ decomposition `B = L Q` of an `m x k` matrix with `m >= k` and full
/// column rank: `L` is lower triangular with positive diagonal and `Q` is
/// `k x k` orthogonal.
///
/// Computed as a Householder QR of `B'`, transposed back. Columns whose
/// sub-diagonal part is already zero are not reflected, so a `B` that is
/// already lower triangular with positive diagonal comes back unchanged with
/// `Q = I`.
pub fn lq_decompose(b: &Matrix) -> Result<(LowerTriangular, Matrix)> {
    let (m, k) = b.shape();
    if m < k || k == 0 {
        return Err(Error::DimensionMismatch {
            what: "lq_decompose needs rows >= cols >= 1",
            expected: (k.max(1), k.max(1)),
            got: (m, k),
        });
    }
    let max_col_norm = (0..k)
        .map(|j| (0..m).map(|i| b[(i, j)] * b[(i, j)]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);

    // a = B' is k x m; accumulate q1 with B' = q1 r.
    let mut a = b.transpose();
    let mut q1 = Matrix::identity(k);
    let mut v = vec![0.0; k];
    for j in 0..k {
        let below: f64 = (j + 1..k).map(|r| a[(r, j)] * a[(r, j)]).sum();
        if below == 0.0 {
            continue;
        }
        let norm = (a[(j, j)] * a[(j, j)] + below).sqrt();
        let alpha = if a[(j, j)] >= 0.0 { -norm } else { norm };
        let len = k - j;
        for t in 0..len {
            v[t] = a[(j + t, j)];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..len].iter().map(|x| x * x).sum();
        for c in j..m {
            let s: f64 = (0..len).map(|t| v[t] * a[(j + t, c)]).sum();
            let f = 2.0 * s / vnorm2;
            for t in 0..len {
                a[(j + t, c)] -= f * v[t];
            }
        }
        for r in 0..k {
            let s: f64 = (0..len).map(|t| q1[(r, j + t)] * v[t]).sum();
            let f = 2.0 * s / vnorm2;
            for t in 0..len {
                q1[(r, j + t)] -= f * v[t];
            }
        }
        for r in j + 1..k {
            a[(r, j)] = 0.0;
        }
    }

    for j in 0..k {
        let d = a[(j, j)];
        if !(d.abs() >= RANK_TOL * max_col_norm) || max_col_norm == 0.0 {
            return Err(Error::RankDeficient { column: j });
        }
        if d < 0.0 {
            for c in j..m {
                a[(j, c)] = -a[(j, c)];
            }
            for r in 0..k {
                q1[(r, j)] = -q1[(r, j)];
            }
        }
    }
    Ok((LowerTriangular(a.transpose()), q1.transpose()))
}

pub fn standard_normal_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// `mean + G z` with `z` standard normal, i.e. a draw from `N(mean, G G')`.
pub fn mvn_sample<R: Rng + ?Sized>(mean: &[f64], cov_chol: &LowerTriangular, rng: &mut R) -> Vec<f64> {
    let d = mean.len();
    assert_eq!(cov_chol.cols(), d);
    let z = standard_normal_vec(d, rng);
    (0..d)
        .map(|i| mean[i] + dot(&cov_chol.0.row(i)[..=i], &z[..=i]))
        .collect()
}

/// Draw from `N(mean, P^{-1})` given the Cholesky factor `H` of the
/// precision `P = H H'`: returns `mean + H'^{-1} z`.
pub fn mvn_sample_precision<R: Rng + ?Sized>(
    mean: &[f64],
    prec_chol: &LowerTriangular,
    rng: &mut R,
) -> Vec<f64> {
    let z = standard_normal_vec(mean.len(), rng);
    let w = back_solve_transposed(prec_chol, &z);
    mean.iter().zip(&w).map(|(m, w)| m + w).collect()
}

/// Law of the first `d - 1` coordinates of a Gaussian given the last one.
#[derive(Debug, Clone)]
pub struct GaussianConditional {
    pub mean: Vec<f64>,
    pub cov: SpdMatrix,
    pub chol: LowerTriangular,
}

/// Conditions `N(mean, cov)` on its last coordinate taking `value`.
pub fn gaussian_condition(mean: &[f64], cov: &SpdMatrix, value: f64) -> Result<GaussianConditional> {
    let d = mean.len();
    if d < 2 {
        return Err(Error::Domain(alloc::format!(
            "gaussian_condition needs dimension >= 2, got {d}"
        )));
    }
    if cov.dim() != d {
        return Err(Error::DimensionMismatch {
            what: "gaussian_condition covariance",
            expected: (d, d),
            got: (cov.dim(), cov.dim()),
        });
    }
    let last = d - 1;
    let s = cov.get(last, last);
    let shift = (value - mean[last]) / s;
    let cond_mean: Vec<f64> = (0..last).map(|i| mean[i] + cov.get(i, last) * shift).collect();
    let cond = Matrix::from_fn(last, last, |i, j| {
        cov.get(i, j) - cov.get(i, last) * cov.get(last, j) / s
    });
    let cond = SpdMatrix::symmetrize(cond);
    let chol = cholesky(&cond)?;
    Ok(GaussianConditional {
        mean: cond_mean,
        cov: cond,
        chol,
    })
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors as the columns of the second matrix.
pub fn symmetric_eigen(a: &SpdMatrix) -> (Vec<f64>, Matrix) {
    let n = a.dim();
    let mut w = a.0.clone();
    let mut v = Matrix::identity(n);
    let scale = w.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| w[(i, j)] * w[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (w[(q, q)] - w[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let wrp = w[(r, p)];
                    let wrq = w[(r, q)];
                    w[(r, p)] = c * wrp - s * wrq;
                    w[(r, q)] = s * wrp + c * wrq;
                }
                for r in 0..n {
                    let wpr = w[(p, r)];
                    let wqr = w[(q, r)];
                    w[(p, r)] = c * wpr - s * wqr;
                    w[(q, r)] = s * wpr + c * wqr;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(j, j)].total_cmp(&w[(i, i)]));
    let values = order.iter().map(|&i| w[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}
