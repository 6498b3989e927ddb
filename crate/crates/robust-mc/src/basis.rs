//! Column-local orthonormal bases and the observation projector.
//!
//! A basis element `w_ij` is supported entirely on column j: it equals
//! `q_j^(i) e_j^T` where `q_j^(i)` is the i-th column of a per-column
//! orthonormal m x m transform. The identity transform recovers the
//! standard basis `e_i e_j^T`; a shared transform covers cosine/Fourier
//! style measurement bases.

use crate::error::{Error, Result};
use crate::mat::{qr, DenseMatrix};
use crate::rng::Rng;
use nalgebra::DMatrix;

const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Per-column orthonormal transform family defining the basis `{w_ij}`.
#[derive(Debug, Clone)]
pub enum ColumnLocalBasis {
    /// Standard basis `e_i e_j^T`.
    Identity { m: usize, n: usize },
    /// One orthonormal m x m transform shared by every column.
    SharedTransform { g: DenseMatrix, n: usize },
    /// An independent orthonormal m x m transform per column.
    PerColumnTransforms { gs: Vec<DenseMatrix> },
}

fn check_orthonormal(g: &DenseMatrix) -> Result<()> {
    if g.rows() != g.cols() {
        return Err(Error::dims("basis transform must be square"));
    }
    let m = g.rows();
    let res = (g.transpose() * g.as_na() - DMatrix::identity(m, m)).norm();
    if res > ORTHONORMALITY_TOL {
        return Err(Error::invalid(format!(
            "basis transform is not orthonormal (residual {res:.2e})"
        )));
    }
    Ok(())
}

impl ColumnLocalBasis {
    pub fn identity(m: usize, n: usize) -> Self {
        ColumnLocalBasis::Identity { m, n }
    }

    pub fn shared(g: DenseMatrix, n: usize) -> Result<Self> {
        check_orthonormal(&g)?;
        Ok(ColumnLocalBasis::SharedTransform { g, n })
    }

    pub fn per_column(gs: Vec<DenseMatrix>) -> Result<Self> {
        if gs.is_empty() {
            return Err(Error::invalid("per-column basis needs at least one column"));
        }
        let m = gs[0].rows();
        for g in &gs {
            if g.rows() != m {
                return Err(Error::dims("per-column transforms must share a row count"));
            }
            check_orthonormal(g)?;
        }
        Ok(ColumnLocalBasis::PerColumnTransforms { gs })
    }

    pub fn rows(&self) -> usize {
        match self {
            ColumnLocalBasis::Identity { m, .. } => *m,
            ColumnLocalBasis::SharedTransform { g, .. } => g.rows(),
            ColumnLocalBasis::PerColumnTransforms { gs } => gs[0].rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            ColumnLocalBasis::Identity { n, .. } => *n,
            ColumnLocalBasis::SharedTransform { n, .. } => *n,
            ColumnLocalBasis::PerColumnTransforms { gs } => gs.len(),
        }
    }

    /// The transform of column `j` as a matrix reference, or `None` for the
    /// identity.
    fn transform(&self, j: usize) -> Option<&DenseMatrix> {
        match self {
            ColumnLocalBasis::Identity { .. } => None,
            ColumnLocalBasis::SharedTransform { g, .. } => Some(g),
            ColumnLocalBasis::PerColumnTransforms { gs } => Some(&gs[j]),
        }
    }

    /// Restriction of the basis to a subset of columns, preserving order.
    pub fn restrict_columns(&self, cols: &[usize]) -> ColumnLocalBasis {
        match self {
            ColumnLocalBasis::Identity { m, .. } => ColumnLocalBasis::Identity {
                m: *m,
                n: cols.len(),
            },
            ColumnLocalBasis::SharedTransform { g, .. } => ColumnLocalBasis::SharedTransform {
                g: g.clone(),
                n: cols.len(),
            },
            ColumnLocalBasis::PerColumnTransforms { gs } => ColumnLocalBasis::PerColumnTransforms {
                gs: cols.iter().map(|&j| gs[j].clone()).collect(),
            },
        }
    }

    fn check_dims(&self, x: &DenseMatrix) -> Result<()> {
        if x.rows() != self.rows() || x.cols() != self.cols() {
            return Err(Error::dims(format!(
                "matrix is {}x{} but basis is {}x{}",
                x.rows(),
                x.cols(),
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }

    /// Coefficient matrix `C` with `C_ij = <X, w_ij> = (Q_j^T X_j)_i`.
    pub fn analyze(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_dims(x)?;
        match self {
            ColumnLocalBasis::Identity { .. } => Ok(x.clone()),
            ColumnLocalBasis::SharedTransform { g, .. } => {
                Ok(DenseMatrix::from_na_unchecked(g.transpose() * x.as_na()))
            }
            ColumnLocalBasis::PerColumnTransforms { gs } => {
                let mut c = DMatrix::zeros(x.rows(), x.cols());
                for j in 0..x.cols() {
                    let col = gs[j].transpose() * x.column(j);
                    c.column_mut(j).copy_from(&col);
                }
                Ok(DenseMatrix::from_na_unchecked(c))
            }
        }
    }

    /// Exact inverse of [`analyze`](Self::analyze).
    pub fn synthesize(&self, c: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_dims(c)?;
        match self {
            ColumnLocalBasis::Identity { .. } => Ok(c.clone()),
            ColumnLocalBasis::SharedTransform { g, .. } => {
                Ok(DenseMatrix::from_na_unchecked(g.as_na() * c.as_na()))
            }
            ColumnLocalBasis::PerColumnTransforms { gs } => {
                let mut x = DMatrix::zeros(c.rows(), c.cols());
                for j in 0..c.cols() {
                    let col = gs[j].as_na() * c.column(j);
                    x.column_mut(j).copy_from(&col);
                }
                Ok(DenseMatrix::from_na_unchecked(x))
            }
        }
    }

    /// Coefficients of a single column: `Q_j^T x`.
    pub fn analyze_column(&self, j: usize, x: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        match self.transform(j) {
            None => x.clone(),
            Some(g) => g.transpose() * x,
        }
    }

    /// Apply `Q_j^T` to every column of `a` (the coefficient-domain image
    /// of a dictionary, used by the per-column filtering step).
    pub fn analyze_dictionary(&self, j: usize, a: &DMatrix<f64>) -> DMatrix<f64> {
        match self.transform(j) {
            None => a.clone(),
            Some(g) => g.transpose() * a,
        }
    }

    /// Column j in matrix space from its coefficient vector.
    pub fn synthesize_column(&self, j: usize, c: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        match self.transform(j) {
            None => c.clone(),
            Some(g) => g.as_na() * c,
        }
    }
}

/// Observed coefficient indices `K_obs` with their values `<M, w_ij>`.
#[derive(Debug, Clone)]
pub struct ObservedCoefficients {
    m: usize,
    n: usize,
    /// Observed (row) coefficient indices per column, each sorted ascending.
    by_column: Vec<Vec<u32>>,
    /// Values aligned with the flattened `by_column` order.
    values: Vec<Vec<f64>>,
}

impl ObservedCoefficients {
    /// Build from (i, j, value) triples. Indices must be unique and in
    /// range; values finite.
    pub fn new(m: usize, n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid("observation dimensions must be positive"));
        }
        let mut by_column: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triples {
            if i >= m || j >= n {
                return Err(Error::invalid(format!(
                    "coefficient index ({i}, {j}) out of range for {m}x{n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::invalid("coefficient values must be finite"));
            }
            by_column[j].push((i as u32, v));
        }
        let mut rows = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for col in &mut by_column {
            col.sort_unstable_by_key(|&(i, _)| i);
            if col.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::invalid("duplicate coefficient index"));
            }
            rows.push(col.iter().map(|&(i, _)| i).collect());
            values.push(col.iter().map(|&(_, v)| v).collect());
        }
        Ok(ObservedCoefficients {
            m,
            n,
            by_column: rows,
            values,
        })
    }

    /// Observe every coefficient of `x` under `basis` at the mask positions.
    pub fn from_matrix(
        x: &DenseMatrix,
        basis: &ColumnLocalBasis,
        mask: &[(usize, usize)],
    ) -> Result<Self> {
        let c = basis.analyze(x)?;
        let triples: Vec<(usize, usize, f64)> =
            mask.iter().map(|&(i, j)| (i, j, c[(i, j)])).collect();
        ObservedCoefficients::new(x.rows(), x.cols(), &triples)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.by_column.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_column.iter().all(Vec::is_empty)
    }

    /// Observed coefficient row indices of column j, sorted.
    pub fn column_indices(&self, j: usize) -> &[u32] {
        &self.by_column[j]
    }

    /// Observed coefficient values of column j, aligned with
    /// [`column_indices`](Self::column_indices).
    pub fn column_values(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    /// Iterate all (i, j, value) triples in column-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |j| {
            self.by_column[j]
                .iter()
                .zip(&self.values[j])
                .map(move |(&i, &v)| (i as usize, j, v))
        })
    }

    /// The matrix `synthesize(observed values, zeros elsewhere)`: the
    /// minimum-norm matrix consistent with the observations.
    pub fn to_matrix(&self, basis: &ColumnLocalBasis) -> Result<DenseMatrix> {
        let mut c = DMatrix::zeros(self.m, self.n);
        for (i, j, v) in self.triples() {
            c[(i, j)] = v;
        }
        basis.synthesize(&DenseMatrix::from_na_unchecked(c))
    }

    /// Overwrite the observed coefficient positions of `c` (a coefficient
    /// matrix) with the observed values.
    pub fn overwrite_coefficients(&self, c: &mut DMatrix<f64>) {
        for (i, j, v) in self.triples() {
            c[(i, j)] = v;
        }
    }

    /// Zero the coefficients of `c` outside the observed set.
    pub fn mask_coefficients(&self, c: &mut DMatrix<f64>) {
        for j in 0..self.n {
            let obs = &self.by_column[j];
            let mut cursor = 0usize;
            for i in 0..self.m {
                if cursor < obs.len() && obs[cursor] as usize == i {
                    cursor += 1;
                } else {
                    c[(i, j)] = 0.0;
                }
            }
        }
    }

    /// Restriction to a subset of columns (indices preserved in order,
    /// renumbered 0..len).
    pub fn restrict_columns(&self, cols: &[usize]) -> ObservedCoefficients {
        ObservedCoefficients {
            m: self.m,
            n: cols.len(),
            by_column: cols.iter().map(|&j| self.by_column[j].clone()).collect(),
            values: cols.iter().map(|&j| self.values[j].clone()).collect(),
        }
    }

    /// Frobenius norm of the observed coefficient vector.
    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Orthogonal projection `R(X)` onto the span of the observed basis
/// elements: analyze, zero the unobserved coefficients, synthesize.
pub fn project_observed(
    x: &DenseMatrix,
    obs: &ObservedCoefficients,
    basis: &ColumnLocalBasis,
) -> Result<DenseMatrix> {
    let mut c = basis.analyze(x)?.into_na();
    obs.mask_coefficients(&mut c);
    basis.synthesize(&DenseMatrix::from_na_unchecked(c))
}

/// Haar-distributed orthonormal m x m matrix: QR of a Gaussian matrix with
/// the non-negative-diagonal sign convention.
pub fn random_orthonormal(m: usize, rng: &mut Rng) -> DenseMatrix {
    assert!(m >= 1, "dimension must be positive");
    let g = DenseMatrix::from_fn(m, m, |_, _| rng.gaussian());
    DenseMatrix::from_na_unchecked(qr(&g).q)
}

/// Serializable basis descriptor: which family of transforms to build.
/// The random kinds draw their transforms from the generator handed to
/// [`BasisKind::build`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Identity,
    /// Shared orthonormal type-II DCT transform.
    Dct,
    /// One Haar-random orthonormal transform shared by all columns.
    SharedRandom,
    /// An independent Haar-random orthonormal transform per column.
    PerColumnRandom,
}

impl BasisKind {
    pub fn build(self, m: usize, n: usize, rng: &mut Rng) -> ColumnLocalBasis {
        match self {
            BasisKind::Identity => ColumnLocalBasis::identity(m, n),
            BasisKind::Dct => ColumnLocalBasis::SharedTransform {
                g: dct_transform(m),
                n,
            },
            BasisKind::SharedRandom => ColumnLocalBasis::SharedTransform {
                g: random_orthonormal(m, rng),
                n,
            },
            BasisKind::PerColumnRandom => ColumnLocalBasis::PerColumnTransforms {
                gs: (0..n).map(|_| random_orthonormal(m, rng)).collect(),
            },
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(BasisKind::Identity),
            "dct" => Ok(BasisKind::Dct),
            "shared-random" => Ok(BasisKind::SharedRandom),
            "per-column-random" => Ok(BasisKind::PerColumnRandom),
            other => Err(Error::invalid(format!(
                "unknown basis kind '{other}' (expected identity|dct|shared-random|per-column-random)"
            ))),
        }
    }
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BasisKind::Identity => "identity",
            BasisKind::Dct => "dct",
            BasisKind::SharedRandom => "shared-random",
            BasisKind::PerColumnRandom => "per-column-random",
        };
        f.write_str(s)
    }
}

/// Orthonormal type-II discrete cosine transform matrix (columns are the
/// cosine basis vectors).
pub fn dct_transform(m: usize) -> DenseMatrix {
    assert!(m >= 1, "dimension must be positive");
    let mf = m as f64;
    DenseMatrix::from_fn(m, m, |i, k| {
        let scale = if k == 0 {
            (1.0 / mf).sqrt()
        } else {
            (2.0 / mf).sqrt()
        };
        scale * (std::f64::consts::PI * (i as f64 + 0.5) * k as f64 / mf).cos()
    })
}
