//! Dense linear-algebra kernels and proximal operators.
//!
//! Everything here is a pure function on immutable inputs: truncated SVD,
//! thin QR, pseudo-inverse, the matrix norms used by the solvers, and the
//! proximal operators of the nuclear and l2,1 norms.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::ops::Deref;

/// Default relative tolerance for discarding singular values; the noise
/// floor of a double-precision SVD.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Real m x n matrix with finite entries.
///
/// Wraps `nalgebra::DMatrix<f64>` and guarantees, at construction time,
/// that every entry is finite. Derefs immutably to the inner matrix so all
/// read-only `nalgebra` operations are available.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl Deref for DenseMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.inner
    }
}

impl DenseMatrix {
    /// Build from row-major entries. Rejects empty shapes, length
    /// mismatches, and non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::dims(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if !entries.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        let inner = DMatrix::from_row_iterator(rows, cols, entries.iter().copied());
        Ok(DenseMatrix { inner })
    }

    /// Wrap an existing `DMatrix`, validating finiteness.
    pub fn from_na(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if !inner.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(DenseMatrix { inner })
    }

    /// Wrap without the finiteness scan. For internal results whose
    /// finiteness follows from finite inputs.
    pub(crate) fn from_na_unchecked(inner: DMatrix<f64>) -> Self {
        debug_assert!(inner.iter().all(|x| x.is_finite()));
        DenseMatrix { inner }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        DenseMatrix {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub fn as_na(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_na(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    /// Entries in row-major order (the file-format order).
    pub fn to_row_major(&self) -> Vec<f64> {
        let (m, n) = (self.rows(), self.cols());
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }
}

/// Truncated (skinny) SVD: only the singular triples above the relative
/// rank tolerance are kept.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// m x r, column-orthonormal. Zero columns when rank is 0.
    pub u: DMatrix<f64>,
    /// Positive singular values, non-increasing.
    pub sigma: Vec<f64>,
    /// n x r, column-orthonormal.
    pub v: DMatrix<f64>,
    /// The relative tolerance that was used for truncation.
    pub rank_tol: f64,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// U diag(sigma) V^T.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        if self.rank() == 0 {
            return DMatrix::zeros(self.u.nrows(), self.v.nrows());
        }
        let mut us = self.u.clone();
        for (k, &s) in self.sigma.iter().enumerate() {
            us.column_mut(k).scale_mut(s);
        }
        &us * self.v.transpose()
    }
}

/// Thin QR factors with a non-negative R diagonal.
#[derive(Debug, Clone)]
pub struct QrFactors {
    /// h x r, column-orthonormal.
    pub q: DMatrix<f64>,
    /// r x r upper-triangular, diagonal >= 0.
    pub r: DMatrix<f64>,
}

impl QrFactors {
    /// Numerical rank revealed by the diagonal of R against
    /// `1e-12 * max|A|` by default, or a caller-supplied absolute tolerance.
    pub fn rank(&self, tol: f64) -> usize {
        (0..self.r.nrows())
            .filter(|&i| self.r[(i, i)].abs() > tol)
            .count()
    }
}

/// Thin SVD via faer, returned as (U, sigma, V) with sigma non-increasing.
/// nalgebra's SVD can return inconsistent factors on rank-deficient inputs
/// containing exact zero columns, so all SVD consumers go through here.
fn full_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (m, n) = (a.nrows(), a.ncols());
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa
        .thin_svd()
        .map_err(|_| Error::invalid("svd failed to converge"))?;
    let k = m.min(n);
    let u = DMatrix::from_fn(m, k, |i, j| svd.U()[(i, j)]);
    let v = DMatrix::from_fn(n, k, |i, j| svd.V()[(i, j)]);
    let s = svd.S().column_vector();
    let sigma: Vec<f64> = (0..k).map(|i| s[i]).collect();
    Ok((u, sigma, v))
}

/// Skinny SVD of `a`, keeping triples with `sigma_i > rank_tol * sigma_1`
/// (and always `sigma_i > 0`).
pub fn skinny_svd(a: &DenseMatrix, rank_tol: f64) -> Result<SvdFactors> {
    if rank_tol < 0.0 {
        return Err(Error::invalid("rank_tol must be non-negative"));
    }
    let (u_full, sigma_all, v_full) = full_svd(a.as_na())?;
    let s1 = sigma_all.first().copied().unwrap_or(0.0);
    let cutoff = rank_tol * s1;
    let r = sigma_all
        .iter()
        .take_while(|&&s| s > cutoff && s > 0.0)
        .count();
    let u = u_full.columns(0, r).into_owned();
    let v = v_full.columns(0, r).into_owned();
    Ok(SvdFactors {
        u,
        sigma: sigma_all[..r].to_vec(),
        v,
        rank_tol,
    })
}

/// Thin QR of `a` with the sign convention that the diagonal of R is
/// non-negative.
pub fn qr(a: &DenseMatrix) -> QrFactors {
    let fact = a.as_na().clone().qr();
    let mut q = fact.q();
    let mut r = fact.r();
    // Flip signs so diag(R) >= 0; deterministic factors.
    for k in 0..r.nrows() {
        if r[(k, k)] < 0.0 {
            r.row_mut(k).neg_mut();
            q.column_mut(k).neg_mut();
        }
    }
    QrFactors { q, r }
}

/// Moore-Penrose pseudo-inverse through the skinny SVD at the default rank
/// tolerance.
pub fn pinv(a: &DenseMatrix) -> Result<DenseMatrix> {
    let f = skinny_svd(a, DEFAULT_RANK_TOL)?;
    if f.rank() == 0 {
        return Ok(DenseMatrix::zeros(a.cols(), a.rows()));
    }
    let mut vs = f.v.clone();
    for (k, &s) in f.sigma.iter().enumerate() {
        vs.column_mut(k).scale_mut(1.0 / s);
    }
    Ok(DenseMatrix::from_na_unchecked(&vs * f.u.transpose()))
}

/// The matrix norms used throughout: nuclear, l2,1, l2,inf, Frobenius,
/// spectral, l1, linf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub nuclear: f64,
    pub l21: f64,
    pub l2inf: f64,
    pub frobenius: f64,
    pub spectral: f64,
    pub l1: f64,
    pub linf: f64,
}

pub fn norms(a: &DenseMatrix) -> Norms {
    let sv = full_svd(a.as_na()).map(|(_, s, _)| s).unwrap_or_default();
    let nuclear: f64 = sv.iter().sum();
    let spectral = sv.iter().cloned().fold(0.0, f64::max);
    let mut l21 = 0.0;
    let mut l2inf: f64 = 0.0;
    for j in 0..a.cols() {
        let cn = a.column(j).norm();
        l21 += cn;
        l2inf = l2inf.max(cn);
    }
    Norms {
        nuclear,
        l21,
        l2inf,
        frobenius: a.norm(),
        spectral,
        l1: a.iter().map(|x| x.abs()).sum(),
        linf: a.iter().map(|x| x.abs()).fold(0.0, f64::max),
    }
}

/// Singular value thresholding: the proximal operator of `tau * ||.||_*`.
pub fn svt(a: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if tau <= 0.0 {
        return Err(Error::invalid("svt threshold must be positive"));
    }
    let (u, sigma, v) = full_svd(a.as_na())?;
    let mut us = u;
    let mut any = false;
    for (k, &s) in sigma.iter().enumerate() {
        let shrunk = (s - tau).max(0.0);
        us.column_mut(k).scale_mut(shrunk);
        any |= shrunk > 0.0;
    }
    if !any {
        return Ok(DenseMatrix::zeros(a.rows(), a.cols()));
    }
    Ok(DenseMatrix::from_na_unchecked(&us * v.transpose()))
}

/// Column-wise shrinkage: the proximal operator of `tau * ||.||_{2,1}`.
/// Column j maps to `max(1 - tau/||a_j||, 0) * a_j`.
pub fn column_shrink(a: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if tau <= 0.0 {
        return Err(Error::invalid("column_shrink threshold must be positive"));
    }
    let mut out = a.as_na().clone();
    for j in 0..out.ncols() {
        let n = out.column(j).norm();
        if n <= tau {
            out.column_mut(j).fill(0.0);
        } else {
            out.column_mut(j).scale_mut(1.0 - tau / n);
        }
    }
    Ok(DenseMatrix::from_na_unchecked(out))
}
