//! Inexact augmented-Lagrangian / ADMM solver for
//! `min ||L||_* + lambda ||S||_{2,1}  s.t.  R(L + S) = R(M)`.
//!
//! Three-block scheme with an auxiliary consensus variable `D` constrained
//! to the affine set `{X : R(X) = R(M)}`:
//!
//! ```text
//! L <- svt_{1/beta}(D - S - Lambda/beta)
//! S <- column_shrink_{lambda/beta}(R(D - L - Lambda/beta))
//! D <- (L + S + Lambda/beta) with observed coefficients overwritten by M's
//! Lambda <- Lambda + beta (L + S - D)
//! beta <- min(beta * growth, beta_max)
//! ```
//!
//! Every subproblem is closed-form under a column-local basis. The `R(.)`
//! in the S-update restricts S to the observed coefficient space, which is
//! where the optimum lives anyway; it makes the optimality condition
//! `analyze(S*) = 0` outside the observed set hold exactly.

use crate::basis::{project_observed, ColumnLocalBasis, ObservedCoefficients};
use crate::error::{Error, Result};
use crate::mat::{column_shrink, norms, skinny_svd, svt, DenseMatrix, DEFAULT_RANK_TOL};
use nalgebra::DMatrix;

/// Solver parameters. `lambda` and `beta0` default to the closed-form
/// choices when left unset.
#[derive(Debug, Clone)]
pub struct AdmmConfig {
    /// Regularizer for the l2,1 term; `None` means `1/sqrt(max(ln n, 1))`.
    pub lambda: Option<f64>,
    /// Initial penalty; `None` means `1.25 / sigma_1(D0)`.
    pub beta0: Option<f64>,
    pub beta_growth: f64,
    pub beta_max: f64,
    pub max_iter: usize,
    /// Relative feasibility tolerance.
    pub tol: f64,
    /// Relative rank tolerance handed to the SVD kernels.
    pub rank_tol: f64,
    /// Re-solve a support-constrained completion once the support is known
    /// (only kicks in when some coefficients are unobserved).
    pub refine: bool,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            lambda: None,
            beta0: None,
            // Moderate growth; faster schedules (1.5) freeze the iterates
            // at feasible but measurably suboptimal points.
            beta_growth: 1.1,
            beta_max: 1e10,
            max_iter: 1000,
            tol: 1e-8,
            rank_tol: DEFAULT_RANK_TOL,
            refine: true,
        }
    }
}

impl AdmmConfig {
    fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda {
            if l <= 0.0 {
                return Err(Error::invalid("lambda must be positive"));
            }
        }
        if let Some(b) = self.beta0 {
            if b <= 0.0 {
                return Err(Error::invalid("beta0 must be positive"));
            }
        }
        if self.beta_growth < 1.0 {
            return Err(Error::invalid("beta_growth must be >= 1"));
        }
        if self.beta_max <= 0.0 || self.max_iter == 0 || self.tol <= 0.0 || self.rank_tol < 0.0 {
            return Err(Error::invalid("invalid solver configuration"));
        }
        Ok(())
    }
}

/// Optimal pair and convergence telemetry.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub l_star: DenseMatrix,
    pub s_star: DenseMatrix,
    pub iterations: usize,
    /// Relative feasibility residual per outer iteration.
    pub feasibility_history: Vec<f64>,
    pub converged: bool,
    /// Final multiplier, for stationarity diagnostics.
    pub multiplier: DenseMatrix,
    /// `||L*||_* + lambda ||S*||_{2,1}`.
    pub objective: f64,
    /// The lambda that was actually used.
    pub lambda: f64,
}

/// The universal regularizer `lambda = 1/sqrt(max(ln n, 1))`.
pub fn default_lambda(n: usize) -> f64 {
    assert!(n >= 1, "column count must be positive");
    1.0 / (n as f64).ln().max(1.0).sqrt()
}

/// Solve the relaxed program from the observed coefficients.
pub fn solve(
    observed: &ObservedCoefficients,
    basis: &ColumnLocalBasis,
    config: &AdmmConfig,
) -> Result<SolveResult> {
    config.validate()?;
    if observed.is_empty() {
        return Err(Error::invalid("observation mask is empty"));
    }
    if observed.rows() != basis.rows() || observed.cols() != basis.cols() {
        return Err(Error::dims(format!(
            "observations are {}x{} but basis is {}x{}",
            observed.rows(),
            observed.cols(),
            basis.rows(),
            basis.cols()
        )));
    }
    let (m, n) = (observed.rows(), observed.cols());
    let lambda = config.lambda.unwrap_or_else(|| default_lambda(n));

    let main = admm_loop(
        observed,
        basis,
        Some(lambda),
        config,
        config.tol,
        config.max_iter,
    )?;
    let LoopState {
        mut l,
        mut s,
        mut iterations,
        mut history,
        converged,
        lagr,
    } = main;

    // Support-constrained refinement: the augmented-Lagrangian iterates stop
    // once they are feasible, which with missing coefficients can be well
    // before the completion of the clean columns has settled (the sparse
    // part absorbs whatever residual is left). With the support in hand, a
    // pure completion pass over the unflagged columns has no such slack and
    // converges to the exact completion, so we re-solve it and rebuild the
    // pair. Skipped under full observation, where there is nothing to
    // complete.
    let total_coeffs: usize = (0..n).map(|j| observed.column_values(j).len()).sum();
    if config.refine && total_coeffs < m * n {
        let flagged = recovered_support(
            &DenseMatrix::from_na_unchecked(s.clone()),
            observed,
            SUPPORT_REL_TOL,
        );
        let keep: Vec<usize> = (0..n)
            .filter(|&j| !flagged.contains(j) && !observed.column_values(j).is_empty())
            .collect();
        if !keep.is_empty() {
            let obs_keep = observed.restrict_columns(&keep);
            let basis_keep = basis.restrict_columns(&keep);
            let mc = admm_loop(
                &obs_keep,
                &basis_keep,
                None,
                config,
                config.tol.min(1e-11),
                config.max_iter.max(5000),
            )?;
            if mc.converged {
                let mut l_ref = DMatrix::<f64>::zeros(m, n);
                for (k, &j) in keep.iter().enumerate() {
                    l_ref.column_mut(j).copy_from(&mc.l.column(k));
                }
                // S picks up exactly the observed residual R(M - L).
                let d0 = observed.to_matrix(basis)?.into_na();
                let s_target = DenseMatrix::from_na_unchecked(&d0 - &l_ref);
                let s_ref = project_observed(&s_target, observed, basis)?.into_na();
                l = l_ref;
                s = s_ref;
                iterations += mc.iterations;
                history.extend(mc.history);
            }
        }
    }

    let l_star = DenseMatrix::from_na_unchecked(l);
    let s_star = DenseMatrix::from_na_unchecked(s);
    let objective = norms(&l_star).nuclear + lambda * norms(&s_star).l21;
    Ok(SolveResult {
        l_star,
        s_star,
        iterations,
        feasibility_history: history,
        converged,
        multiplier: DenseMatrix::from_na_unchecked(lagr),
        objective,
        lambda,
    })
}

struct LoopState {
    l: DMatrix<f64>,
    s: DMatrix<f64>,
    iterations: usize,
    history: Vec<f64>,
    converged: bool,
    lagr: DMatrix<f64>,
}

/// The inexact augmented-Lagrangian sweep. With `lambda = None` the sparse
/// block is pinned at zero and the loop reduces to nuclear-norm completion
/// of the observed coefficients.
fn admm_loop(
    observed: &ObservedCoefficients,
    basis: &ColumnLocalBasis,
    lambda: Option<f64>,
    config: &AdmmConfig,
    tol: f64,
    max_iter: usize,
) -> Result<LoopState> {
    let (m, n) = (observed.rows(), observed.cols());
    let d0 = observed.to_matrix(basis)?;
    let sigma1 = norms(&d0).spectral;
    let mut beta = config
        .beta0
        .unwrap_or_else(|| if sigma1 > 0.0 { 1.25 / sigma1 } else { 1.25 });
    let obs_norm = observed.norm().max(1.0);

    let mut l = DMatrix::<f64>::zeros(m, n);
    let mut s = DMatrix::<f64>::zeros(m, n);
    let mut d = d0.into_na();
    // Multiplier; stays in the observed coefficient space throughout.
    let mut lagr = DMatrix::<f64>::zeros(m, n);

    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=max_iter {
        iterations = iter;
        let l_prev = l.clone();
        let s_prev = s.clone();

        let l_target = DenseMatrix::from_na_unchecked(&d - &s - &lagr / beta);
        l = svt(&l_target, 1.0 / beta)?.into_na();

        if let Some(lambda) = lambda {
            let s_target = DenseMatrix::from_na_unchecked(&d - &l - &lagr / beta);
            let s_target = project_observed(&s_target, observed, basis)?;
            s = column_shrink(&s_target, lambda / beta)?.into_na();
        }

        // D-update: overwrite the observed coefficients with M's, keep the
        // rest of L + S + Lambda/beta.
        let t = DenseMatrix::from_na_unchecked(&l + &s + &lagr / beta);
        let mut c = basis.analyze(&t)?.into_na();
        observed.overwrite_coefficients(&mut c);
        d = basis.synthesize(&DenseMatrix::from_na_unchecked(c))?.into_na();

        let gap = &l + &s - &d;
        lagr += beta * &gap;

        // Lambda lives in the observed space, so the unobserved part of the
        // gap is exactly zero and ||gap||_F = ||R(L + S - M)||_F.
        let residual = gap.norm() / obs_norm;
        history.push(residual);

        // `tol` is a relative feasibility tolerance. Feasibility alone can
        // be reached with the blocks still moving (the penalty growth
        // shrinks the gap faster than the proximal steps settle), so the
        // certificate also requires the iterates to be stationary.
        let rel_change = ((&l - &l_prev).norm() + (&s - &s_prev).norm()) / obs_norm;
        if residual <= tol && rel_change <= tol {
            converged = true;
            break;
        }
        beta = (beta * config.beta_growth).min(config.beta_max);
    }

    Ok(LoopState {
        l,
        s,
        iterations,
        history,
        converged,
        lagr,
    })
}

/// Relative threshold for reading a column support off a recovered
/// sparse part. Outlier columns carry essentially all of their observed
/// energy in `S*` (ratio near 1), while the leakage onto heavy inlier
/// columns stays at ratio ~0.1; 0.5 splits the two regimes.
pub const SUPPORT_REL_TOL: f64 = 0.5;

/// Column support of a sparse part: columns whose `S` norm exceeds
/// `rel_tol` times the observed column norm (floored at 1).
pub fn recovered_support(
    s: &DenseMatrix,
    observed: &ObservedCoefficients,
    rel_tol: f64,
) -> crate::metrics::SupportSet {
    crate::metrics::SupportSet::new((0..s.cols()).filter(|&j| {
        let y = observed
            .column_values(j)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        s.column(j).norm() > rel_tol * y.max(1.0)
    }))
}

/// Outlier-pursuit convenience wrapper: identity basis, full observation.
pub fn solve_standard_rpca(m: &DenseMatrix, lambda: f64) -> Result<SolveResult> {
    let basis = ColumnLocalBasis::identity(m.rows(), m.cols());
    let mask: Vec<(usize, usize)> = (0..m.rows())
        .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
        .collect();
    let observed = ObservedCoefficients::from_matrix(m, &basis, &mask)?;
    let config = AdmmConfig {
        lambda: Some(lambda),
        ..AdmmConfig::default()
    };
    solve(&observed, &basis, &config)
}

/// Subgradient stationarity residuals of a solution: the nuclear-norm
/// residual at `L*` and the l2,1 residual at `S*` against the final
/// multiplier. Both are ~0 at an exact saddle point.
pub fn stationarity_residuals(result: &SolveResult) -> (f64, f64) {
    let g = DenseMatrix::from_na_unchecked(-result.multiplier.as_na());
    let f = skinny_svd(&result.l_star, 1e-6).expect("finite solution");
    let pt = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let ptu = &f.u * (f.u.transpose() * x);
        let ptv = (x * &f.v) * f.v.transpose();
        let ptuv = &f.u * ((f.u.transpose() * x) * &f.v) * f.v.transpose();
        ptu + ptv - ptuv
    };
    let uv = &f.u * f.v.transpose();
    let g_t = pt(g.as_na());
    let r_nuclear_t = (&g_t - uv).norm();
    let g_perp = DenseMatrix::from_na_unchecked(g.as_na() - &g_t);
    let r_nuclear_perp = (norms(&g_perp).spectral - 1.0).max(0.0);

    let lambda = result.lambda;
    let mut r_l21: f64 = 0.0;
    for j in 0..result.s_star.cols() {
        let sj = result.s_star.column(j);
        let gj = g.column(j);
        let sn = sj.norm();
        let col_res = if sn > 1e-12 {
            (gj - sj * (lambda / sn)).norm()
        } else {
            (gj.norm() - lambda).max(0.0)
        };
        r_l21 = r_l21.max(col_res);
    }
    (r_nuclear_t.max(r_nuclear_perp), r_l21)
}
