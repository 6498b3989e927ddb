//! Subspace clustering on top of the completion solvers: build the
//! low-rank-representation affinity from the recovered matrix, then
//! spectral clustering.

use crate::admm::{self, AdmmConfig};
use crate::basis::{ColumnLocalBasis, ObservedCoefficients};
use crate::error::{Error, Result};
use crate::filter::{self, FilterConfig};
use crate::mat::{pinv, skinny_svd, DenseMatrix};
use crate::rng::Rng;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Minimum-norm LRR coefficient matrix of `L` w.r.t. itself:
/// `Z = pinv(L) L = V V^T`, the projector onto the row space.
pub fn lrr_from_mc(l: &DenseMatrix) -> Result<DenseMatrix> {
    let p = pinv(l)?;
    Ok(DenseMatrix::from_na_unchecked(p.as_na() * l.as_na()))
}

/// Shape-interaction matrix `V V^T` from the skinny SVD of `L`.
pub fn shape_interaction(l: &DenseMatrix, rank_tol: f64) -> Result<DenseMatrix> {
    let f = skinny_svd(l, rank_tol)?;
    let r = f.rank();
    let v = f.v.columns(0, r).into_owned();
    Ok(DenseMatrix::from_na_unchecked(&v * v.transpose()))
}

/// Spectral clustering of the affinity `|Z| + |Z^T|` into k groups via
/// the symmetric normalized Laplacian and k-means++ on the embedding.
pub fn spectral_cluster(z: &DenseMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = z.cols();
    if z.rows() != n {
        return Err(Error::dims("affinity source must be square"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid("cluster count must satisfy 0 < k <= n"));
    }

    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] = z[(i, j)].abs() + z[(j, i)].abs();
        }
    }
    // Symmetric normalized Laplacian; a small ridge keeps isolated
    // columns from dividing by zero.
    let mut dinv = DVector::<f64>::zeros(n);
    for i in 0..n {
        let deg: f64 = w.row(i).iter().sum::<f64>().max(1e-12);
        dinv[i] = 1.0 / deg.sqrt();
    }
    let mut lap = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            lap[(i, j)] -= dinv[i] * w[(i, j)] * dinv[j];
        }
    }
    // Bottom-k eigenvectors of the Laplacian.
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut embed = DMatrix::<f64>::zeros(n, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        embed.column_mut(c).copy_from(&eig.eigenvectors.column(idx));
    }
    for mut row in embed.row_iter_mut() {
        let norm = row.norm();
        if norm > 1e-12 {
            row /= norm;
        }
    }
    Ok(kmeans(&embed, k, seed))
}

/// k-means++ with 10 restarts; the restart with the lowest within-cluster
/// cost wins, earliest restart breaking ties.
fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut rng = Rng::new(seed);
    for _ in 0..10 {
        let mut stream = rng.substream();
        let (labels, cost) = kmeans_once(points, k, &mut stream);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, labels));
        }
    }
    best.expect("at least one restart").1
}

fn kmeans_once(points: &DMatrix<f64>, k: usize, rng: &mut Rng) -> (Vec<usize>, f64) {
    let n = points.nrows();
    // k-means++ seeding.
    let mut centers: Vec<DVector<f64>> = Vec::with_capacity(k);
    let first = (rng.uniform() * n as f64) as usize % n;
    centers.push(points.row(first).transpose());
    while centers.len() < k {
        let d2: Vec<f64> = (0..n)
            .map(|i| {
                centers
                    .iter()
                    .map(|c| (points.row(i).transpose() - c).norm_squared())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            (rng.uniform() * n as f64) as usize % n
        } else {
            let mut t = rng.uniform() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                t -= d;
                if t <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        };
        centers.push(points.row(next).transpose());
    }

    let mut labels = vec![0usize; n];
    let mut cost = 0.0;
    for _ in 0..100 {
        cost = 0.0;
        let mut changed = false;
        for i in 0..n {
            let p = points.row(i).transpose();
            let (mut arg, mut best) = (0usize, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = (&p - center).norm_squared();
                if d < best {
                    best = d;
                    arg = c;
                }
            }
            if labels[i] != arg {
                labels[i] = arg;
                changed = true;
            }
            cost += best;
        }
        // Recompute centers; empty clusters keep their previous center.
        for c in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            let mut mean = DVector::<f64>::zeros(points.ncols());
            for &i in &members {
                mean += points.row(i).transpose();
            }
            centers[c] = mean / members.len() as f64;
        }
        if !changed {
            break;
        }
    }
    (labels, cost)
}

/// End-to-end robust clustering of partially observed, column-corrupted
/// data: complete with ADMM (or filtering when `filter` is given), drop
/// flagged outlier columns (label -1), and cluster the rest through the
/// LRR affinity.
pub fn cluster_with_missing(
    observed: &ObservedCoefficients,
    basis: &ColumnLocalBasis,
    k: usize,
    admm_config: &AdmmConfig,
    filter_config: Option<&FilterConfig>,
    seed: u64,
) -> Result<Vec<isize>> {
    let n = observed.cols();
    let (l_star, flags): (DenseMatrix, Vec<bool>) = match filter_config {
        Some(fc) => {
            let fr = filter::run(observed, basis, fc)?;
            (fr.completed, fr.outlier_flags)
        }
        None => {
            let sr = admm::solve(observed, basis, admm_config)?;
            let support = admm::recovered_support(&sr.s_star, observed, admm::SUPPORT_REL_TOL);
            let flags: Vec<bool> = (0..n).map(|j| support.contains(j)).collect();
            (sr.l_star, flags)
        }
    };

    let inliers: Vec<usize> = (0..n).filter(|&j| !flags[j]).collect();
    if inliers.len() < k {
        return Err(Error::invalid(
            "fewer inlier columns than requested clusters",
        ));
    }
    let mut sub = DMatrix::<f64>::zeros(l_star.rows(), inliers.len());
    for (c, &j) in inliers.iter().enumerate() {
        sub.column_mut(c).copy_from(&l_star.column(j));
    }
    let z = lrr_from_mc(&DenseMatrix::from_na_unchecked(sub))?;
    let labels = spectral_cluster(&z, k, seed)?;

    let mut out = vec![-1isize; n];
    for (c, &j) in inliers.iter().enumerate() {
        out[j] = labels[c] as isize;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisKind;
    use crate::mat::DEFAULT_RANK_TOL;
    use crate::metrics::clustering_accuracy;
    use crate::synth::gen_union_of_subspaces;

    #[test]
    fn lrr_is_row_projector() {
        let mut rng = Rng::new(1);
        let x = DMatrix::from_fn(8, 3, |_, _| rng.gaussian());
        let y = DMatrix::from_fn(12, 3, |_, _| rng.gaussian());
        let l = DenseMatrix::from_na_unchecked(&x * y.transpose());
        let z = lrr_from_mc(&l).unwrap();
        // Idempotent and symmetric: Z = V V^T.
        assert!((z.as_na() * z.as_na() - z.as_na()).norm() < 1e-8);
        assert!((z.as_na() - z.transpose()).norm() < 1e-8);
        // Self-expression: L Z = L.
        assert!((l.as_na() * z.as_na() - l.as_na()).norm() < 1e-8);
        // Matches the shape-interaction matrix.
        let sim = shape_interaction(&l, DEFAULT_RANK_TOL).unwrap();
        assert!((z.as_na() - sim.as_na()).norm() < 1e-8);
    }

    #[test]
    fn lrr_of_independent_subspaces_is_block_diagonal() {
        let mut rng = Rng::new(2);
        let (problem, labels) =
            gen_union_of_subspaces(30, &[2, 2, 2], 10, 0.0, 1.0, &mut rng).unwrap();
        let z = lrr_from_mc(&problem.l0).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                if labels[i] != labels[j] {
                    assert!(
                        z[(i, j)].abs() < 1e-8,
                        "off-block entry ({i},{j}) = {}",
                        z[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn spectral_cluster_disconnected_blocks() {
        // Two disconnected cliques must split exactly.
        let n = 10;
        let z = DenseMatrix::from_fn(n, n, |i, j| {
            if (i < 5) == (j < 5) {
                1.0
            } else {
                0.0
            }
        });
        let labels = spectral_cluster(&z, 2, 0).unwrap();
        assert_eq!(labels[0..5].iter().collect::<std::collections::HashSet<_>>().len(), 1);
        assert_eq!(labels[5..].iter().collect::<std::collections::HashSet<_>>().len(), 1);
        assert_ne!(labels[0], labels[9]);
    }

    #[test]
    fn spectral_cluster_validates() {
        let z = DenseMatrix::zeros(4, 4);
        assert!(spectral_cluster(&z, 0, 0).is_err());
        assert!(spectral_cluster(&z, 5, 0).is_err());
    }

    #[test]
    fn full_pipeline_on_clean_union_of_subspaces() {
        let mut rng = Rng::new(3);
        let (problem, truth) =
            gen_union_of_subspaces(40, &[3, 3, 3], 15, 0.0, 1.0, &mut rng).unwrap();
        let labels = cluster_with_missing(
            &problem.observed,
            &problem.basis,
            3,
            &AdmmConfig::default(),
            None,
            7,
        )
        .unwrap();
        let acc = clustering_accuracy(&labels, &truth).unwrap();
        assert!(acc >= 0.99, "accuracy {acc}");
    }

    #[test]
    fn pipeline_excludes_outlier_columns() {
        let mut rng = Rng::new(4);
        let (problem, truth) =
            gen_union_of_subspaces(40, &[3, 3], 20, 0.1, 1.0, &mut rng).unwrap();
        let labels = cluster_with_missing(
            &problem.observed,
            &problem.basis,
            2,
            &AdmmConfig::default(),
            None,
            11,
        )
        .unwrap();
        for &j in &problem.outlier_support {
            assert_eq!(labels[j], -1, "outlier column {j} must be excluded");
        }
        let acc = clustering_accuracy(&labels, &truth).unwrap();
        assert!(acc >= 0.95, "accuracy {acc}");
    }

    #[test]
    fn basis_kind_pipeline_smoke() {
        // Same data expressed in a shared random basis clusters the same.
        let mut rng = Rng::new(5);
        let (problem, truth) =
            gen_union_of_subspaces(30, &[2, 2], 12, 0.0, 1.0, &mut rng).unwrap();
        let x = problem.l0.as_na() + problem.s0.as_na();
        let basis = BasisKind::SharedRandom.build(30, 24, &mut rng);
        let mask: Vec<(usize, usize)> = (0..30)
            .flat_map(|i| (0..24).map(move |j| (i, j)))
            .collect();
        let observed = ObservedCoefficients::from_matrix(
            &DenseMatrix::from_na(x).unwrap(),
            &basis,
            &mask,
        )
        .unwrap();
        let labels =
            cluster_with_missing(&observed, &basis, 2, &AdmmConfig::default(), None, 13).unwrap();
        let acc = clustering_accuracy(&labels, &truth).unwrap();
        assert!(acc >= 0.99, "accuracy {acc}");
    }
}
