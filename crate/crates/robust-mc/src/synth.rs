//! Seeded generation of synthetic problem instances: low-rank plus
//! column-sparse corruption, Bernoulli masks, the adversarial row-spike
//! construction, and union-of-subspaces data for clustering.

use crate::basis::{BasisKind, ColumnLocalBasis, ObservedCoefficients};
use crate::error::{Error, Result};
use crate::mat::DenseMatrix;
use crate::rng::Rng;
use nalgebra::DMatrix;

/// Parameters of a synthetic instance.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    /// True rank of the clean part.
    pub r: usize,
    /// Outlier column probability, in [0, 1).
    pub a: f64,
    /// Observation probability, in (0, 1].
    pub p0: f64,
    /// Per-entry variance of outlier columns.
    pub noise_variance: f64,
    pub basis: BasisKind,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid("dimensions must be positive"));
        }
        if self.r > self.m.min(self.n) {
            return Err(Error::invalid("rank exceeds min(m, n)"));
        }
        if !(0.0..1.0).contains(&self.a) {
            return Err(Error::invalid("outlier probability must be in [0, 1)"));
        }
        if !(self.p0 > 0.0 && self.p0 <= 1.0) {
            return Err(Error::invalid("observation probability must be in (0, 1]"));
        }
        if self.noise_variance <= 0.0 {
            return Err(Error::invalid("noise variance must be positive"));
        }
        Ok(())
    }
}

/// A generated instance: ground truth, outlier support, and the
/// observations of `M = L0 + S0` under the instance basis.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    pub l0: DenseMatrix,
    pub s0: DenseMatrix,
    /// Sorted outlier column indices.
    pub outlier_support: Vec<usize>,
    pub observed: ObservedCoefficients,
    pub basis: ColumnLocalBasis,
    pub spec: SyntheticSpec,
}

/// `L0 = X Y^T` with i.i.d. standard normal factors `X: m x r`, `Y: n x r`.
pub fn gen_lowrank(spec: &SyntheticSpec, rng: &mut Rng) -> Result<DenseMatrix> {
    spec.validate()?;
    if spec.r == 0 {
        return Ok(DenseMatrix::zeros(spec.m, spec.n));
    }
    let x = DMatrix::from_fn(spec.m, spec.r, |_, _| rng.gaussian());
    let y = DMatrix::from_fn(spec.n, spec.r, |_, _| rng.gaussian());
    Ok(DenseMatrix::from_na_unchecked(&x * y.transpose()))
}

/// Column support from Ber(a); selected columns filled with i.i.d.
/// `N(0, noise_variance)` entries.
pub fn gen_outliers(spec: &SyntheticSpec, rng: &mut Rng) -> Result<(DenseMatrix, Vec<usize>)> {
    spec.validate()?;
    let std = spec.noise_variance.sqrt();
    let mut s0 = DMatrix::zeros(spec.m, spec.n);
    let mut support = Vec::new();
    for j in 0..spec.n {
        if rng.bernoulli(spec.a) {
            support.push(j);
            for i in 0..spec.m {
                s0[(i, j)] = std * rng.gaussian();
            }
        }
    }
    Ok((DenseMatrix::from_na_unchecked(s0), support))
}

/// Each coefficient index included independently with probability p0.
pub fn gen_mask(spec: &SyntheticSpec, rng: &mut Rng) -> Result<Vec<(usize, usize)>> {
    spec.validate()?;
    let mut mask = Vec::new();
    for j in 0..spec.n {
        for i in 0..spec.m {
            if rng.bernoulli(spec.p0) {
                mask.push((i, j));
            }
        }
    }
    Ok(mask)
}

/// Assemble a full instance. The low-rank part is zeroed on the outlier
/// support, so `L0 = P_{I0 perp} L0` holds exactly.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticProblem> {
    spec.validate()?;
    let mut master = Rng::new(spec.seed);
    let mut basis_rng = master.substream();
    let mut lowrank_rng = master.substream();
    let mut outlier_rng = master.substream();
    let mut mask_rng = master.substream();

    let basis = spec.basis.build(spec.m, spec.n, &mut basis_rng);
    let mut l0 = gen_lowrank(spec, &mut lowrank_rng)?.into_na();
    let (s0, support) = gen_outliers(spec, &mut outlier_rng)?;
    for &j in &support {
        l0.column_mut(j).fill(0.0);
    }
    let l0 = DenseMatrix::from_na_unchecked(l0);
    let mask = gen_mask(spec, &mut mask_rng)?;
    let m_mat = DenseMatrix::from_na_unchecked(l0.as_na() + s0.as_na());
    let observed = ObservedCoefficients::from_matrix(&m_mat, &basis, &mask)?;
    Ok(SyntheticProblem {
        l0,
        s0,
        outlier_support: support,
        observed,
        basis,
        spec: spec.clone(),
    })
}

/// The adversarial construction: incoherent low-rank part, but every
/// corrupted column is a single spike in row 0, full observation.
pub fn gen_adversarial_row_spike(
    n: usize,
    r: usize,
    a: f64,
    spike: f64,
    rng: &mut Rng,
) -> Result<SyntheticProblem> {
    let spec = SyntheticSpec {
        m: n,
        n,
        r,
        a,
        p0: 1.0,
        noise_variance: 1.0,
        basis: BasisKind::Identity,
        seed: 0,
    };
    spec.validate()?;
    if !spike.is_finite() {
        return Err(Error::invalid("spike magnitude must be finite"));
    }
    let basis = ColumnLocalBasis::identity(n, n);
    let mut l0 = gen_lowrank(&spec, rng)?.into_na();
    let mut s0 = DMatrix::zeros(n, n);
    let mut support = Vec::new();
    for j in 0..n {
        if rng.bernoulli(a) {
            support.push(j);
            s0[(0, j)] = spike;
            l0.column_mut(j).fill(0.0);
        }
    }
    let l0 = DenseMatrix::from_na_unchecked(l0);
    let s0 = DenseMatrix::from_na_unchecked(s0);
    let m_mat = DenseMatrix::from_na_unchecked(l0.as_na() + s0.as_na());
    let mask: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let observed = ObservedCoefficients::from_matrix(&m_mat, &basis, &mask)?;
    Ok(SyntheticProblem {
        l0,
        s0,
        outlier_support: support,
        observed,
        basis,
        spec,
    })
}

/// Union-of-independent-subspaces data for the clustering pipeline. Each
/// cluster's columns are random combinations of an independent random
/// orthonormal basis; outlier columns are replaced with isotropic noise.
/// Returns the instance and the true per-column cluster labels.
pub fn gen_union_of_subspaces(
    m: usize,
    dims: &[usize],
    points_per_subspace: usize,
    a: f64,
    p0: f64,
    rng: &mut Rng,
) -> Result<(SyntheticProblem, Vec<usize>)> {
    let total_dim: usize = dims.iter().sum();
    if total_dim > m {
        return Err(Error::invalid(format!(
            "subspace dimensions sum to {total_dim} > ambient dimension {m}"
        )));
    }
    if dims.is_empty() || points_per_subspace == 0 {
        return Err(Error::invalid("need at least one subspace and one point"));
    }
    let n = dims.len() * points_per_subspace;
    let spec = SyntheticSpec {
        m,
        n,
        r: total_dim.min(n),
        a,
        p0,
        noise_variance: 1.0,
        basis: BasisKind::Identity,
        seed: 0,
    };
    spec.validate()?;

    // One Haar-random orthonormal frame; disjoint column blocks give
    // independent subspaces.
    let frame = crate::basis::random_orthonormal(m, rng);
    let mut l0 = DMatrix::zeros(m, n);
    let mut labels = Vec::with_capacity(n);
    let mut offset = 0usize;
    for (cluster, &dim) in dims.iter().enumerate() {
        let sub_basis = frame.columns(offset, dim).into_owned();
        for p in 0..points_per_subspace {
            let col_idx = cluster * points_per_subspace + p;
            let coeff = nalgebra::DVector::from_fn(dim, |_, _| rng.gaussian());
            l0.column_mut(col_idx).copy_from(&(&sub_basis * coeff));
            labels.push(cluster);
        }
        offset += dim;
    }

    let mut s0 = DMatrix::zeros(m, n);
    let mut support = Vec::new();
    for j in 0..n {
        if rng.bernoulli(a) {
            support.push(j);
            l0.column_mut(j).fill(0.0);
            for i in 0..m {
                s0[(i, j)] = rng.gaussian();
            }
        }
    }

    let basis = ColumnLocalBasis::identity(m, n);
    let l0 = DenseMatrix::from_na_unchecked(l0);
    let s0 = DenseMatrix::from_na_unchecked(s0);
    let m_mat = DenseMatrix::from_na_unchecked(l0.as_na() + s0.as_na());
    let mut mask = Vec::new();
    for j in 0..n {
        for i in 0..m {
            if rng.bernoulli(p0) {
                mask.push((i, j));
            }
        }
    }
    let observed = ObservedCoefficients::from_matrix(&m_mat, &basis, &mask)?;
    Ok((
        SyntheticProblem {
            l0,
            s0,
            outlier_support: support,
            observed,
            basis,
            spec,
        },
        labels,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::skinny_svd;

    fn base_spec() -> SyntheticSpec {
        SyntheticSpec {
            m: 50,
            n: 50,
            r: 1,
            a: 0.1,
            p0: 0.8,
            noise_variance: 1.0,
            basis: BasisKind::Identity,
            seed: 7,
        }
    }

    #[test]
    fn rank_zero_gives_zero_matrix() {
        let spec = SyntheticSpec { r: 0, ..base_spec() };
        let l0 = gen_lowrank(&spec, &mut Rng::new(1)).unwrap();
        assert_eq!(l0.as_na(), &DMatrix::zeros(50, 50));
    }

    #[test]
    fn rank_one_is_numerically_rank_one() {
        let l0 = gen_lowrank(&base_spec(), &mut Rng::new(2)).unwrap();
        assert_eq!(skinny_svd(&l0, 1e-8).unwrap().rank(), 1);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let spec = base_spec();
        let p1 = generate(&spec).unwrap();
        let p2 = generate(&spec).unwrap();
        assert_eq!(p1.l0.as_na(), p2.l0.as_na());
        assert_eq!(p1.s0.as_na(), p2.s0.as_na());
        assert_eq!(p1.outlier_support, p2.outlier_support);
        assert_eq!(p1.observed.len(), p2.observed.len());
    }

    #[test]
    fn outlier_extremes() {
        let spec = SyntheticSpec { a: 0.0, ..base_spec() };
        let (s0, support) = gen_outliers(&spec, &mut Rng::new(3)).unwrap();
        assert!(support.is_empty());
        assert_eq!(s0.as_na(), &DMatrix::zeros(50, 50));
        let spec = SyntheticSpec { a: 0.999999999, ..base_spec() };
        let (_, support) = gen_outliers(&spec, &mut Rng::new(3)).unwrap();
        assert_eq!(support.len(), 50);
    }

    #[test]
    fn outlier_count_concentrates() {
        let spec = SyntheticSpec {
            m: 1,
            n: 10_000,
            a: 0.1,
            ..base_spec()
        };
        let (_, support) = gen_outliers(&spec, &mut Rng::new(4)).unwrap();
        assert!((800..=1200).contains(&support.len()), "{}", support.len());
    }

    #[test]
    fn mask_extremes() {
        let spec = SyntheticSpec { m: 10, n: 10, ..base_spec() };
        let full = gen_mask(&SyntheticSpec { p0: 1.0, ..spec.clone() }, &mut Rng::new(5)).unwrap();
        assert_eq!(full.len(), 100);
    }

    #[test]
    fn problem_invariants_hold() {
        let spec = SyntheticSpec { r: 3, ..base_spec() };
        let p = generate(&spec).unwrap();
        for &j in &p.outlier_support {
            assert_eq!(p.l0.column(j).norm(), 0.0);
        }
        for j in 0..p.spec.n {
            if !p.outlier_support.contains(&j) {
                assert_eq!(p.s0.column(j).norm(), 0.0);
            }
        }
        assert_eq!(skinny_svd(&p.l0, 1e-8).unwrap().rank(), 3);
        // Outlier columns do not lie in Range(L0).
        let f = skinny_svd(&p.l0, 1e-8).unwrap();
        for &j in &p.outlier_support {
            let col = p.s0.column(j).into_owned();
            let proj = &f.u * (f.u.transpose() * &col);
            assert!((col - proj).norm() > 1e-8);
        }
    }

    #[test]
    fn adversarial_spike_columns() {
        let mut rng = Rng::new(6);
        let p = gen_adversarial_row_spike(200, 5, 10.0 / 200.0, 200.0, &mut rng).unwrap();
        assert!(!p.outlier_support.is_empty());
        for &j in &p.outlier_support {
            assert_eq!(p.s0.column(j).norm(), 200.0);
            assert_eq!(p.s0[(0, j)], 200.0);
        }
        assert_eq!(p.observed.len(), 200 * 200);
    }

    #[test]
    fn adversarial_without_outliers_is_lowrank() {
        let mut rng = Rng::new(7);
        let p = gen_adversarial_row_spike(50, 2, 0.0, 50.0, &mut rng).unwrap();
        assert!(p.outlier_support.is_empty());
        assert_eq!(p.s0.as_na(), &DMatrix::zeros(50, 50));
        assert_eq!(skinny_svd(&p.l0, 1e-8).unwrap().rank(), 2);
    }

    #[test]
    fn union_of_subspaces_rank_and_membership() {
        let mut rng = Rng::new(8);
        let (p, labels) =
            gen_union_of_subspaces(60, &[4, 4, 4], 20, 0.0, 1.0, &mut rng).unwrap();
        assert_eq!(labels.len(), 60);
        assert_eq!(skinny_svd(&p.l0, 1e-8).unwrap().rank(), 12);
        // Every column lies exactly in its subspace.
        for cluster in 0..3 {
            let cols: Vec<usize> = (0..60).filter(|&j| labels[j] == cluster).collect();
            let block = p.l0.as_na().select_columns(&cols);
            let block_dm = DenseMatrix::from_na(block).unwrap();
            let f = skinny_svd(&block_dm, 1e-8).unwrap();
            assert_eq!(f.rank(), 4);
            for &j in &cols {
                let col = p.l0.column(j).into_owned();
                let proj = &f.u * (f.u.transpose() * &col);
                assert!((col - proj).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn union_of_subspaces_rejects_oversized_dims() {
        let mut rng = Rng::new(9);
        assert!(gen_union_of_subspaces(5, &[3, 3], 4, 0.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn single_subspace_reduces_to_lowrank() {
        let mut rng = Rng::new(10);
        let (p, labels) = gen_union_of_subspaces(20, &[3], 15, 0.0, 1.0, &mut rng).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
        assert_eq!(skinny_svd(&p.l0, 1e-8).unwrap().rank(), 3);
    }
}
