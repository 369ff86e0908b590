//! Dense linear algebra sized for the projected dimension.
//!
//! Matrices are row-major. No general inverse is ever formed: every use of a
//! covariance inverse goes through a [`CholeskyFactor`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold for positive definiteness.
pub const PD_TOLERANCE: f64 = 1e-12;
/// Relative threshold on the diagonal of `R` in [`qr_orthogonal`].
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Dot product with four independent accumulators.
///
/// The summation order is fixed, so results are bit-reproducible.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let rem_a = chunks_a.remainder();
    let rem_b = chunks_b.remainder();
    for (x, y) in chunks_a.zip(chunks_b) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in rem_a.iter().zip(rem_b) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
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
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
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

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Copies the listed rows into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Symmetric matrix storing each off-diagonal pair once (packed lower triangle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    dim: usize,
    packed: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymmetricMatrix {
            dim,
            packed: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut s = SymmetricMatrix::zeros(dim);
        for i in 0..dim {
            s.set(i, i, 1.0);
        }
        s
    }

    /// Builds from `f(i, j)` evaluated on the lower triangle only (`j <= i`).
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut packed = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                packed.push(f(i, j));
            }
        }
        SymmetricMatrix { dim, packed }
    }

    /// Takes the lower triangle of a square matrix; the upper triangle is ignored.
    pub fn from_dense_lower(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        Ok(SymmetricMatrix::from_lower_fn(m.rows(), |i, j| m.get(i, j)))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        SymmetricMatrix::from_dense_lower(&Matrix::from_rows(rows)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.packed[packed_index(i, j)] = v;
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.packed.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn add_to_diagonal(&mut self, eps: f64) {
        for i in 0..self.dim {
            let v = self.get(i, i);
            self.set(i, i, v + eps);
        }
    }

    pub fn scaled(&self, c: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            dim: self.dim,
            packed: self.packed.iter().map(|v| v * c).collect(),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, v.len())?;
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

#[inline]
fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Lower Cholesky factor `L` with `S = L Lᵀ`, stored packed by rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<f64>,
    log_det: f64,
}

impl CholeskyFactor {
    /// Reassembles a factor from its packed lower triangle (e.g. from a model file).
    pub fn from_packed(dim: usize, lower: Vec<f64>) -> Result<Self> {
        check_len(dim * (dim + 1) / 2, lower.len())?;
        let mut log_det = 0.0;
        for i in 0..dim {
            let d = lower[packed_index(i, i)];
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { index: i, pivot: d });
            }
            log_det += d.ln();
        }
        if lower.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Cholesky entry".into()));
        }
        Ok(CholeskyFactor {
            dim,
            lower,
            log_det: 2.0 * log_det,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `log det S`.
    #[inline]
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    #[inline]
    pub fn l(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower[i * (i + 1) / 2 + j]
        }
    }

    pub fn packed_lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn lower_dense(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.dim, |i, j| self.l(i, j))
    }

    /// Solves `L y = v`.
    pub fn forward_solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, v.len())?;
        let mut y = v.to_vec();
        for i in 0..self.dim {
            let row = &self.lower[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            let s = dot(&row[..i], &y[..i]);
            y[i] = (y[i] - s) / row[i];
        }
        Ok(y)
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward_solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, y.len())?;
        let mut x = y.to_vec();
        for i in (0..self.dim).rev() {
            x[i] /= self.l(i, i);
            let xi = x[i];
            for k in 0..i {
                x[k] -= self.l(i, k) * xi;
            }
        }
        Ok(x)
    }

    /// Solves `S x = v`.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.backward_solve(&self.forward_solve(v)?)
    }

    /// `vᵀ S⁻¹ v` computed as `‖L⁻¹ v‖²`.
    pub fn solve_quadratic_form(&self, v: &[f64]) -> Result<f64> {
        let y = self.forward_solve(v)?;
        Ok(dot(&y, &y))
    }

    /// `L v`.
    pub fn lower_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, v.len())?;
        Ok((0..self.dim)
            .map(|i| dot(&self.lower[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1], &v[..=i]))
            .collect())
    }
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot falls to
/// `PD_TOLERANCE · max(diagonal)` or below.
pub fn cholesky(s: &SymmetricMatrix) -> Result<CholeskyFactor> {
    let n = s.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("cholesky of an empty matrix".into()));
    }
    let max_diag = (0..n).map(|i| s.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    if !(max_diag > 0.0) || !max_diag.is_finite() {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: max_diag,
        });
    }
    let tol = PD_TOLERANCE * max_diag;
    let mut lower = vec![0.0; n * (n + 1) / 2];
    let mut log_det = 0.0;
    for i in 0..n {
        let ri = i * (i + 1) / 2;
        for j in 0..=i {
            let rj = j * (j + 1) / 2;
            let s_ij = s.get(i, j) - dot(&lower[ri..ri + j], &lower[rj..rj + j]);
            if i == j {
                if !(s_ij > tol) {
                    return Err(Error::NotPositiveDefinite {
                        index: i,
                        pivot: s_ij,
                    });
                }
                let d = s_ij.sqrt();
                lower[ri + i] = d;
                log_det += d.ln();
            } else {
                lower[ri + j] = s_ij / lower[rj + j];
            }
        }
    }
    Ok(CholeskyFactor {
        dim: n,
        lower,
        log_det: 2.0 * log_det,
    })
}

/// Orthogonal factor `Q` of `A = Q R` with `diag(R) > 0`.
///
/// Accepts tall matrices (`rows >= cols`) and returns the thin `rows × cols`
/// factor with orthonormal columns; a square input yields a square orthogonal
/// matrix. Uses Householder reflections.
pub fn qr_orthogonal(a: &Matrix) -> Result<Matrix> {
    let (m, n) = (a.rows(), a.cols());
    if m < n || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "qr_orthogonal needs rows >= cols >= 1, got {m}x{n}"
        )));
    }
    let norm_a = a.frobenius_norm();
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut r_diag = vec![0.0; n];
    for k in 0..n {
        let x: Vec<f64> = (k..m).map(|i| r.get(i, k)).collect();
        let alpha = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(alpha > RANK_TOLERANCE * norm_a) {
            return Err(Error::RankDeficient { column: k });
        }
        // Reflect x onto -sign(x0)·alpha·e1 to avoid cancellation.
        let beta = if x[0] >= 0.0 { -alpha } else { alpha };
        let mut v = x;
        v[0] -= beta;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let s: f64 = (k..m).map(|i| v[i - k] * r.get(i, j)).sum::<f64>() * 2.0 / vnorm2;
                for i in k..m {
                    let val = r.get(i, j) - s * v[i - k];
                    r.set(i, j, val);
                }
            }
        }
        r_diag[k] = r.get(k, k);
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity.
    let mut q = Matrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for k in (0..n).rev() {
        let v = &reflectors[k];
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in 0..n {
            let s: f64 = (k..m).map(|i| v[i - k] * q.get(i, j)).sum::<f64>() * 2.0 / vnorm2;
            for i in k..m {
                let val = q.get(i, j) - s * v[i - k];
                q.set(i, j, val);
            }
        }
    }
    // Flip column signs so that R has a positive diagonal.
    for (j, &d) in r_diag.iter().enumerate() {
        if d < 0.0 {
            for i in 0..m {
                let val = -q.get(i, j);
                q.set(i, j, val);
            }
        }
    }
    Ok(q)
}

/// Column means of `x`.
pub fn column_means(x: &Matrix) -> Vec<f64> {
    let mut mean = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    let n = x.rows() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Unbiased sample covariance `(n-1)⁻¹ Σ (x_i - mean)(x_i - mean)ᵀ`.
pub fn sample_covariance(x: &Matrix, mean: &[f64]) -> Result<SymmetricMatrix> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::TooFewSamples { n });
    }
    check_len(x.cols(), mean.len())?;
    let p = x.cols();
    let mut acc = SymmetricMatrix::zeros(p);
    let mut centered = vec![0.0; p];
    for i in 0..n {
        for ((c, v), m) in centered.iter_mut().zip(x.row(i)).zip(mean) {
            *c = v - m;
        }
        for a in 0..p {
            let ca = centered[a];
            let base = a * (a + 1) / 2;
            for b in 0..=a {
                acc.packed[base + b] += ca * centered[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    acc.packed.iter_mut().for_each(|v| *v /= denom);
    Ok(acc)
}
