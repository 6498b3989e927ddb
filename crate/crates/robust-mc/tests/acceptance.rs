//! Acceptance gate: ten end-to-end checks of the recovery, filtering,
//! phase-structure, and clustering claims at their stated tolerances.
//! Each test prints a single `criterion NN ...: PASS|FAIL` line (visible
//! under `cargo test -- --nocapture`) before asserting.

use nalgebra::DMatrix;
use robust_mc::filter::sample_seed_columns;
use robust_mc::mat::{self, column_shrink, skinny_svd, svt};
use robust_mc::metrics::{clustering_accuracy, subspace_distance, support_hamming, SupportSet};
use robust_mc::synth::{gen_adversarial_row_spike, gen_union_of_subspaces, generate};
use robust_mc::*;
use std::time::Instant;

/// Distance between the column spaces of the planted and recovered
/// low-rank parts; 1.0 when exactly one of them is zero.
fn dist_to_truth(l0: &DenseMatrix, l: &DenseMatrix) -> f64 {
    let f0 = skinny_svd(l0, 1e-8).unwrap();
    let f1 = skinny_svd(l, 1e-6).unwrap();
    if f0.rank() == 0 || f1.rank() == 0 {
        return if f0.rank() == f1.rank() { 0.0 } else { 1.0 };
    }
    let u0 = DenseMatrix::from_na(f0.u).unwrap();
    let u1 = DenseMatrix::from_na(f1.u).unwrap();
    subspace_distance(&u0, &u1).unwrap()
}

/// One generate-solve-score round: (support Hamming distance, subspace
/// distance, wall-clock seconds).
fn solve_trial(spec: &SyntheticSpec, cfg: &AdmmConfig) -> (usize, f64, f64) {
    let p = generate(spec).unwrap();
    let start = Instant::now();
    let res = admm::solve(&p.observed, &p.basis, cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let truth = SupportSet::new(p.outlier_support.iter().copied());
    let found = admm::recovered_support(&res.s_star, &p.observed, admm::SUPPORT_REL_TOL);
    let ham = support_hamming(&found, &truth, spec.n).unwrap();
    let dist = dist_to_truth(&p.l0, &res.l_star);
    (ham, dist, secs)
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id:02} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id:02} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_desk_scale_recovery() {
    let mut detail = String::new();
    let mut pass = true;
    for n in [100usize, 200] {
        let mut ok = 0;
        let mut max_secs: f64 = 0.0;
        for t in 0..10u64 {
            let spec = SyntheticSpec {
                m: n,
                n,
                r: n / 20,
                a: 0.1,
                p0: 0.8,
                noise_variance: 1.0,
                basis: BasisKind::Identity,
                seed: 100 + t,
            };
            let (ham, dist, secs) = solve_trial(&spec, &AdmmConfig::default());
            max_secs = max_secs.max(secs);
            if ham == 0 && dist <= 1e-6 {
                ok += 1;
            }
        }
        pass &= ok >= 9 && max_secs <= 60.0;
        detail.push_str(&format!("n={n}: {ok}/10, max {max_secs:.1}s; "));
    }
    report(1, "desk-scale recovery", pass, &detail);
}

#[test]
fn criterion_02_noise_magnitude_invariance() {
    let n = 200usize;
    let mut detail = String::new();
    let mut pass = true;
    for noise_variance in [1.0 / n as f64, 1.0, n as f64] {
        let mut ok = 0;
        for t in 0..10u64 {
            let spec = SyntheticSpec {
                m: n,
                n,
                r: n / 20,
                a: 0.1,
                p0: 0.8,
                noise_variance,
                basis: BasisKind::Identity,
                seed: 300 + t,
            };
            let (ham, dist, _) = solve_trial(&spec, &AdmmConfig::default());
            if ham == 0 && dist <= 1e-6 {
                ok += 1;
            }
        }
        pass &= ok >= 9;
        detail.push_str(&format!("var={noise_variance}: {ok}/10; "));
    }
    report(2, "outlier-magnitude invariance", pass, &detail);
}

#[test]
fn criterion_03_general_basis_recovery() {
    let n = 200usize;
    let mut detail = String::new();
    let mut pass = true;
    for basis in [BasisKind::SharedRandom, BasisKind::Dct] {
        let mut ok = 0;
        for t in 0..10u64 {
            let spec = SyntheticSpec {
                m: n,
                n,
                r: n / 20,
                a: 0.1,
                p0: 0.8,
                noise_variance: 1.0,
                basis,
                seed: 500 + t,
            };
            let (ham, dist, _) = solve_trial(&spec, &AdmmConfig::default());
            if ham == 0 && dist <= 1e-6 {
                ok += 1;
            }
        }
        pass &= ok >= 9;
        detail.push_str(&format!("{basis:?}: {ok}/10; "));
    }
    report(3, "general-basis recovery", pass, &detail);
}

#[test]
fn criterion_04_filtering_speed() {
    let n = 1000usize;
    let mut detail = String::new();
    let mut pass = true;
    for (r, min_speedup) in [(1usize, 5.0), (10usize, 2.0)] {
        let spec = SyntheticSpec {
            m: n,
            n,
            r,
            a: 0.1,
            p0: 0.95,
            noise_variance: 1.0,
            basis: BasisKind::Identity,
            seed: 700 + r as u64,
        };
        let p = generate(&spec).unwrap();
        let start = Instant::now();
        let _full = admm::solve(&p.observed, &p.basis, &AdmmConfig::default()).unwrap();
        let t_full = start.elapsed().as_secs_f64();
        let fc = FilterConfig {
            rank_estimate: Some(r),
            ..FilterConfig::default()
        };
        let start = Instant::now();
        let fr = filter::run(&p.observed, &p.basis, &fc).unwrap();
        let t_filter = start.elapsed().as_secs_f64();
        let truth = SupportSet::new(p.outlier_support.iter().copied());
        let found = SupportSet::new((0..n).filter(|&j| fr.outlier_flags[j]));
        let ham = support_hamming(&found, &truth, n).unwrap();
        let f0 = skinny_svd(&p.l0, 1e-8).unwrap();
        let u0 = DenseMatrix::from_na(f0.u).unwrap();
        let dist = if fr.u_basis.ncols() == 0 {
            1.0
        } else {
            let u1 = DenseMatrix::from_na(fr.u_basis.clone()).unwrap();
            subspace_distance(&u0, &u1).unwrap()
        };
        let speedup = t_full / t_filter;
        pass &= ham == 0 && dist <= 1e-6 && speedup >= min_speedup;
        detail.push_str(&format!(
            "r={r}: ham={ham} dist={dist:.1e} speedup={speedup:.1}x (need {min_speedup}x); "
        ));
    }
    report(4, "filtering speed", pass, &detail);
}

#[test]
fn criterion_05_phase_structure() {
    let n = 150usize;
    let start = Instant::now();
    let mut detail = String::new();
    let mut pass = true;
    for (pi, p0) in [1.0f64, 0.5].into_iter().enumerate() {
        let mut grid = [[0u8; 8]; 8];
        for i in 0..8usize {
            let rank_frac = 0.02 + 0.38 * i as f64 / 7.0;
            let r = ((rank_frac * n as f64).round() as usize).max(1);
            for j in 0..8usize {
                let a = 0.02 + 0.38 * j as f64 / 7.0;
                let mut ok = 0u8;
                for t in 0..5u64 {
                    let spec = SyntheticSpec {
                        m: n,
                        n,
                        r,
                        a,
                        p0,
                        noise_variance: 1.0,
                        basis: BasisKind::Identity,
                        seed: 17_000 + (((pi * 8 + i) * 8 + j) as u64) * 5 + t,
                    };
                    let (ham, dist, _) = solve_trial(&spec, &AdmmConfig::default());
                    if ham == 0 && dist <= 1e-6 {
                        ok += 1;
                    }
                }
                grid[i][j] = ok;
            }
        }
        // Monotone non-increasing along both axes, allowing one inversion
        // of magnitude <= 1 trial.
        let mut inversions = 0usize;
        let mut worst = 0u8;
        for i in 0..8 {
            for j in 0..7 {
                if grid[i][j + 1] > grid[i][j] {
                    inversions += 1;
                    worst = worst.max(grid[i][j + 1] - grid[i][j]);
                }
                if grid[j + 1][i] > grid[j][i] {
                    inversions += 1;
                    worst = worst.max(grid[j + 1][i] - grid[j][i]);
                }
            }
        }
        let corners = grid[0][0] == 5 && grid[7][7] == 0;
        pass &= inversions <= 1 && worst <= 1 && corners;
        detail.push_str(&format!(
            "p0={p0}: corners ({}/5, {}/5), {inversions} inversions (worst {worst}); ",
            grid[0][0], grid[7][7]
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 1800.0;
    detail.push_str(&format!("{secs:.0}s total"));
    report(5, "phase structure", pass, &detail);
}

#[test]
fn criterion_06_seed_sampling_concentration() {
    let (n, d) = (1000usize, 100usize);
    let mut ok = 0;
    for t in 0..1000u64 {
        let mut rng = Rng::new(40_000 + t);
        let len = sample_seed_columns(n, d, &mut rng).unwrap().len();
        if 2 * len > d && len < 2 * d {
            ok += 1;
        }
    }
    let pass = ok >= 990;
    report(
        6,
        "seed sampling concentration",
        pass,
        &format!("|omega| in (d/2, 2d) in {ok}/1000 trials"),
    );
}

#[test]
fn criterion_07_lrr_equals_shape_interaction() {
    let mut rng = Rng::new(77);
    let mut worst = 0.0f64;
    for t in 0..50usize {
        let k = 1 + t % 10;
        let m = 12 + (rng.next_u64() % 20) as usize;
        let n = 12 + (rng.next_u64() % 20) as usize;
        let x = DMatrix::from_fn(m, k, |_, _| rng.gaussian());
        let y = DMatrix::from_fn(n, k, |_, _| rng.gaussian());
        let l = DenseMatrix::from_na(&x * y.transpose()).unwrap();
        let z1 = cluster::lrr_from_mc(&l).unwrap();
        let z2 = cluster::shape_interaction(&l, mat::DEFAULT_RANK_TOL).unwrap();
        worst = worst.max((z1.as_na() - z2.as_na()).norm());
    }
    let pass = worst <= 1e-10;
    report(
        7,
        "lrr equals shape interaction",
        pass,
        &format!("worst Frobenius gap {worst:.2e} over 50 matrices"),
    );
}

/// Subgradient optimality residual of `x = svt(a, tau)`: the gradient of
/// the quadratic term, `(a - x)/tau`, must lie in the subdifferential of
/// the nuclear norm at x.
fn svt_subgradient_residual(a: &DenseMatrix, tau: f64) -> f64 {
    let x = svt(a, tau).unwrap();
    let g = (a.as_na() - x.as_na()) / tau;
    let f = skinny_svd(&x, 1e-9).unwrap();
    let uv = &f.u * f.v.transpose();
    let pt = |m: &DMatrix<f64>| -> DMatrix<f64> {
        let pu = &f.u * (f.u.transpose() * m);
        let pv = (m * &f.v) * f.v.transpose();
        let puv = &f.u * ((f.u.transpose() * m) * &f.v) * f.v.transpose();
        pu + pv - puv
    };
    let r1 = (pt(&g) - uv).norm();
    let gperp = &g - pt(&g);
    let r2 = (mat::norms(&DenseMatrix::from_na(gperp).unwrap()).spectral - 1.0).max(0.0);
    r1.max(r2)
}

/// Same for `x = column_shrink(a, tau)` against the l2,1 norm: nonzero
/// columns need `(a_j - x_j)/tau = x_j/||x_j||`, zero columns need
/// `||a_j|| <= tau`.
fn column_shrink_subgradient_residual(a: &DenseMatrix, tau: f64) -> f64 {
    let x = column_shrink(a, tau).unwrap();
    let mut worst = 0.0f64;
    for j in 0..a.cols() {
        let aj = a.column(j);
        let xj = x.column(j);
        let g = (aj - xj) / tau;
        let r = if xj.norm() > 0.0 {
            (g - xj / xj.norm()).norm()
        } else {
            (g.norm() - 1.0).max(0.0)
        };
        worst = worst.max(r);
    }
    worst
}

/// Long-run Douglas-Rachford oracle for the full-observation problem
/// min ||L||_* + lambda ||M - L||_{2,1}; returns the oracle objective.
fn proximal_oracle_objective(m_mat: &DenseMatrix, lambda: f64) -> f64 {
    let t = 1.0;
    let prox_g = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let diff = DenseMatrix::from_na(m_mat.as_na() - x).unwrap();
        m_mat.as_na() - column_shrink(&diff, lambda * t).unwrap().as_na()
    };
    let mut y = m_mat.as_na().clone();
    let mut x = prox_g(&y);
    for _ in 0..100_000 {
        let reflected = DenseMatrix::from_na(2.0 * &x - &y).unwrap();
        let z = svt(&reflected, t).unwrap();
        y += z.as_na() - &x;
        x = prox_g(&y);
    }
    let s = DenseMatrix::from_na(m_mat.as_na() - &x).unwrap();
    mat::norms(&DenseMatrix::from_na(x).unwrap()).nuclear + lambda * mat::norms(&s).l21
}

#[test]
fn criterion_08_proximal_oracles() {
    let mut rng = Rng::new(880);
    let mut worst_prox = 0.0f64;
    for _ in 0..100 {
        let a = DenseMatrix::from_fn(5, 5, |_, _| rng.gaussian());
        worst_prox = worst_prox.max(svt_subgradient_residual(&a, 0.6));
        worst_prox = worst_prox.max(column_shrink_subgradient_residual(&a, 0.6));
    }

    let mut worst_obj = 0.0f64;
    for _ in 0..10 {
        let m_mat = DenseMatrix::from_fn(6, 6, |_, _| rng.gaussian());
        let basis = ColumnLocalBasis::identity(6, 6);
        let mask: Vec<(usize, usize)> =
            (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).collect();
        let observed = ObservedCoefficients::from_matrix(&m_mat, &basis, &mask).unwrap();
        // A finite penalty cap keeps the proximal steps large enough to
        // polish the objective all the way to the minimizer.
        let cfg = AdmmConfig {
            tol: 1e-12,
            max_iter: 200_000,
            beta_max: 100.0,
            ..AdmmConfig::default()
        };
        let res = admm::solve(&observed, &basis, &cfg).unwrap();
        let oracle = proximal_oracle_objective(&m_mat, res.lambda);
        worst_obj = worst_obj.max((res.objective - oracle).abs() / oracle.max(1.0));
    }

    let pass = worst_prox <= 1e-6 && worst_obj <= 1e-6;
    report(
        8,
        "proximal oracles",
        pass,
        &format!("worst subgradient residual {worst_prox:.2e}, worst relative objective gap {worst_obj:.2e}"),
    );
}

#[test]
fn criterion_09_row_spike_expected_failure() {
    // Documented expected failure: outlier columns that are spikes on a
    // single row are collectively rank one, so the convex program absorbs
    // them into the low-rank part instead of flagging them. Recovery of
    // the support must NOT succeed here.
    // Seed chosen so the Bernoulli draw plants its expected ~10 outlier
    // columns; below ~1/lambda^2 = ln n of them the collective rank-one
    // structure is too cheap for the low-rank term and the program flags
    // them correctly after all.
    let n = 1000usize;
    let mut rng = Rng::new(3);
    let p = gen_adversarial_row_spike(n, n / 10, 10.0 / n as f64, 30.0, &mut rng).unwrap();
    let res = admm::solve(&p.observed, &p.basis, &AdmmConfig::default()).unwrap();
    let truth = SupportSet::new(p.outlier_support.iter().copied());
    let found = admm::recovered_support(&res.s_star, &p.observed, admm::SUPPORT_REL_TOL);
    let ham = support_hamming(&found, &truth, n).unwrap();
    let pass = ham > 0;
    report(
        9,
        "row-spike expected failure",
        pass,
        &format!(
            "hamming {ham} with {} planted outliers (nonzero by design)",
            p.outlier_support.len()
        ),
    );
}

#[test]
fn criterion_10_clustering_pipeline() {
    let mut ok = 0;
    for t in 0..10u64 {
        let mut rng = Rng::new(1100 + t);
        let (p, labels) =
            gen_union_of_subspaces(50, &[4, 4, 4], 60, 0.05, 0.95, &mut rng).unwrap();
        let pred = cluster::cluster_with_missing(
            &p.observed,
            &p.basis,
            3,
            &AdmmConfig::default(),
            None,
            1100 + t,
        )
        .unwrap();
        // Inlier accuracy: correctly labeled true inliers over all true
        // inliers; a true inlier flagged as an outlier counts as wrong.
        let inliers: Vec<usize> =
            (0..labels.len()).filter(|j| !p.outlier_support.contains(j)).collect();
        let pred_in: Vec<isize> = inliers.iter().map(|&j| pred[j]).collect();
        let truth_in: Vec<usize> = inliers.iter().map(|&j| labels[j]).collect();
        let labeled = pred_in.iter().filter(|&&l| l >= 0).count();
        let acc = clustering_accuracy(&pred_in, &truth_in).unwrap() * labeled as f64
            / inliers.len() as f64;
        if acc >= 0.95 {
            ok += 1;
        }
    }
    let pass = ok >= 9;
    report(
        10,
        "clustering pipeline",
        pass,
        &format!("inlier accuracy >= 0.95 in {ok}/10 seeds"),
    );
}
