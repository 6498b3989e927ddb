//! Evaluation quantities and model-assumption diagnostics: subspace
//! distance, support Hamming distance, incoherence, ambiguity norm, and
//! clustering accuracy.

use crate::basis::ColumnLocalBasis;
use crate::error::{Error, Result};
use crate::mat::{norms, skinny_svd, DenseMatrix};
use nalgebra::DMatrix;
use std::collections::BTreeSet;

/// Set of column indices (an outlier support).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportSet {
    indices: BTreeSet<usize>,
}

impl SupportSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        SupportSet {
            indices: indices.into_iter().collect(),
        }
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.contains(&j)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

/// Incoherence diagnostics, each rescaled so the model inequality is tight
/// at the reported value.
#[derive(Debug, Clone, Copy)]
pub struct IncoherenceReport {
    /// Row-space incoherence: `(n/r) max_ij ||P_V w_ij||_F^2`.
    pub mu_row: f64,
    /// Column-space incoherence: `(m/r) max_ij ||P_U w_ij||_F^2`.
    pub mu_col: f64,
    /// Cross term: `(mn/r) max_ij <U V^T, w_ij>^2`.
    pub mu_cross: f64,
    /// `max(mu_row, mu_col, mu_cross)`.
    pub mu: f64,
    /// `||B(S)||` when an outlier matrix was supplied.
    pub ambiguity: Option<f64>,
}

/// `||P_{U1} - P_{U2}||_F`, computed stably from the singular values of
/// `U1^T U2`.
pub fn subspace_distance(u1: &DenseMatrix, u2: &DenseMatrix) -> Result<f64> {
    if u1.rows() != u2.rows() {
        return Err(Error::dims("subspace bases must share a row count"));
    }
    for (name, u) in [("first", u1), ("second", u2)] {
        let r = u.cols();
        let res = (u.transpose() * u.as_na() - DMatrix::identity(r, r)).norm();
        if res > 1e-8 {
            return Err(Error::invalid(format!(
                "{name} basis is not column-orthonormal (residual {res:.2e})"
            )));
        }
    }
    let cross = u1.transpose() * u2.as_na();
    let overlap: f64 = cross.singular_values().iter().map(|s| s * s).sum();
    let r1 = u1.cols() as f64;
    let r2 = u2.cols() as f64;
    Ok((r1 + r2 - 2.0 * overlap).max(0.0).sqrt())
}

/// Cardinality of the symmetric difference of two supports.
pub fn support_hamming(i1: &SupportSet, i2: &SupportSet, n: usize) -> Result<usize> {
    for s in [i1, i2] {
        if let Some(max) = s.indices.iter().max() {
            if *max >= n {
                return Err(Error::invalid("support index out of range"));
            }
        }
    }
    Ok(i1.indices.symmetric_difference(&i2.indices).count())
}

/// Incoherence of a low-rank matrix w.r.t. a column-local basis.
///
/// With `w_ij = q_j^(i) e_j^T` the three maxima reduce to:
/// row space, `||P_V w_ij||_F^2 = ||V_{j:}||^2` (independent of i);
/// column space, `||P_U w_ij||_F^2 = ||U^T q_j^(i)||^2`;
/// cross, `<U V^T, w_ij> = (Q_j^T U V_{j:}^T)_i`.
pub fn incoherence(l: &DenseMatrix, basis: &ColumnLocalBasis) -> Result<IncoherenceReport> {
    if l.rows() != basis.rows() || l.cols() != basis.cols() {
        return Err(Error::dims("matrix and basis dimensions differ"));
    }
    let f = skinny_svd(l, 1e-8)?;
    let r = f.rank();
    if r == 0 {
        return Err(Error::invalid("incoherence of the zero matrix is undefined"));
    }
    let (m, n) = (l.rows(), l.cols());
    let rf = r as f64;

    let mut max_row: f64 = 0.0;
    let mut max_col: f64 = 0.0;
    let mut max_cross: f64 = 0.0;
    for j in 0..n {
        let v_row = f.v.row(j).norm_squared();
        max_row = max_row.max(v_row);
        // U^T Q_j: columns are U^T q_j^(i); the cross term is that matrix
        // applied to row j of V.
        let ut_qj = basis.analyze_dictionary(j, &f.u); // Q_j^T U, m x r
        for i in 0..m {
            max_col = max_col.max(ut_qj.row(i).norm_squared());
        }
        let cross = &ut_qj * f.v.row(j).transpose(); // m-vector of <U V^T, w_ij>
        for i in 0..m {
            max_cross = max_cross.max(cross[i] * cross[i]);
        }
    }

    let mu_row = (n as f64 / rf) * max_row;
    let mu_col = (m as f64 / rf) * max_col;
    let mu_cross = (m as f64 * n as f64 / rf) * max_cross;
    Ok(IncoherenceReport {
        mu_row,
        mu_col,
        mu_cross,
        mu: mu_row.max(mu_col).max(mu_cross),
        ambiguity: None,
    })
}

/// Spectral norm of the column-normalized nonzero part of `S`; 0 when all
/// columns are zero.
pub fn ambiguity_norm(s: &DenseMatrix) -> f64 {
    let nonzero: Vec<usize> = (0..s.cols()).filter(|&j| s.column(j).norm() > 0.0).collect();
    if nonzero.is_empty() {
        return 0.0;
    }
    let mut b = DMatrix::zeros(s.rows(), nonzero.len());
    for (k, &j) in nonzero.iter().enumerate() {
        let col = s.column(j);
        b.column_mut(k).copy_from(&(col / col.norm()));
    }
    norms(&DenseMatrix::from_na_unchecked(b)).spectral
}

/// Best label agreement over cluster relabelings, in [0, 1]. Exhaustive
/// over permutations for small label counts, greedy matching above that.
pub fn clustering_accuracy(pred: &[isize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::dims("label vectors must have equal length"));
    }
    if pred.is_empty() {
        return Err(Error::invalid("label vectors are empty"));
    }
    let k_pred = pred.iter().filter(|&&l| l >= 0).map(|&l| l as usize + 1).max().unwrap_or(0);
    let k_true = truth.iter().map(|&l| l + 1).max().unwrap_or(0);
    let k = k_pred.max(k_true).max(1);

    // Contingency counts: agreement[p][t].
    let mut counts = vec![vec![0usize; k]; k];
    let mut total = 0usize;
    for (&p, &t) in pred.iter().zip(truth) {
        if p < 0 {
            continue; // excluded columns do not participate
        }
        counts[p as usize][t] += 1;
        total += 1;
    }
    if total == 0 {
        return Ok(0.0);
    }

    let best = if k <= 8 {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = 0usize;
        permute(&mut perm, 0, &mut |p| {
            let score: usize = (0..k).map(|c| counts[c][p[c]]).sum();
            best = best.max(score);
        });
        best
    } else {
        // Greedy assignment; adequate for the reporting use case.
        let mut used = vec![false; k];
        let mut best = 0usize;
        let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
        for (p, row) in counts.iter().enumerate() {
            for (t, &c) in row.iter().enumerate() {
                pairs.push((c, p, t));
            }
        }
        pairs.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut used_pred = vec![false; k];
        for (c, p, t) in pairs {
            if !used_pred[p] && !used[t] {
                used_pred[p] = true;
                used[t] = true;
                best += c;
            }
        }
        best
    };
    Ok(best as f64 / total as f64)
}

fn permute(perm: &mut Vec<usize>, i: usize, visit: &mut impl FnMut(&[usize])) {
    if i == perm.len() {
        visit(perm);
        return;
    }
    for j in i..perm.len() {
        perm.swap(i, j);
        permute(perm, i + 1, visit);
        perm.swap(i, j);
    }
}
