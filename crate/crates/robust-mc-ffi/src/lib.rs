//! C ABI over the core library. Matrices and solver results are opaque
//! handles; every fallible entry point returns an error code and the
//! last error message is retrievable per thread.

use robust_mc::{
    admm, cluster, default_lambda, filter, metrics, AdmmConfig, ColumnLocalBasis, DenseMatrix,
    FilterConfig, ObservedCoefficients, SolveResult,
};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmcStatus {
    Ok = 0,
    InvalidArgument = 1,
    DimensionMismatch = 2,
    NullPointer = 3,
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &robust_mc::Error) -> RmcStatus {
    match err {
        robust_mc::Error::DimensionMismatch(_) => RmcStatus::DimensionMismatch,
        _ => RmcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> RmcStatus) -> RmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            RmcStatus::Panic
        }
    }
}

/// Opaque dense matrix handle.
pub struct RmcMatrix(DenseMatrix);

/// Opaque handle bundling a problem instance: observed coefficients and
/// the basis they are expressed in.
pub struct RmcProblem {
    observed: ObservedCoefficients,
    basis: ColumnLocalBasis,
}

/// Opaque solver result handle.
pub struct RmcSolveResult(SolveResult);

/// Opaque filtering result handle.
pub struct RmcFilterResult(filter::FilterResult);

/// Pointer to the message for the most recent error on this thread, or
/// null when the last call succeeded. Valid until the next failing call
/// on the same thread.
#[no_mangle]
pub extern "C" fn rmc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Create a matrix from row-major data. On success writes the handle to
/// `out` (free with `rmc_matrix_free`).
///
/// # Safety
/// `data` must point to `rows * cols` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmc_matrix_create(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut RmcMatrix,
) -> RmcStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            set_error("null pointer argument".into());
            return RmcStatus::NullPointer;
        }
        let entries = unsafe { slice::from_raw_parts(data, rows * cols) };
        match DenseMatrix::from_row_major(rows, cols, entries) {
            Ok(m) => {
                unsafe { *out = Box::into_raw(Box::new(RmcMatrix(m))) };
                RmcStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `matrix` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn rmc_matrix_free(matrix: *mut RmcMatrix) {
    if !matrix.is_null() {
        drop(unsafe { Box::from_raw(matrix) });
    }
}

#[no_mangle]
pub extern "C" fn rmc_matrix_rows(matrix: *const RmcMatrix) -> usize {
    unsafe { matrix.as_ref() }.map_or(0, |m| m.0.rows())
}

#[no_mangle]
pub extern "C" fn rmc_matrix_cols(matrix: *const RmcMatrix) -> usize {
    unsafe { matrix.as_ref() }.map_or(0, |m| m.0.cols())
}

/// Copy the matrix out in row-major order.
///
/// # Safety
/// `buffer` must hold at least `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn rmc_matrix_copy_data(
    matrix: *const RmcMatrix,
    buffer: *mut f64,
    len: usize,
) -> RmcStatus {
    guard(|| {
        let Some(m) = (unsafe { matrix.as_ref() }) else {
            set_error("null matrix handle".into());
            return RmcStatus::NullPointer;
        };
        if buffer.is_null() {
            set_error("null buffer".into());
            return RmcStatus::NullPointer;
        }
        let data = m.0.to_row_major();
        if len < data.len() {
            set_error(format!("buffer holds {len} values, need {}", data.len()));
            return RmcStatus::DimensionMismatch;
        }
        unsafe { ptr::copy_nonoverlapping(data.as_ptr(), buffer, data.len()) };
        RmcStatus::Ok
    })
}

/// Build a problem in the identity (entrywise) basis from coefficient
/// triples `(rows_idx[t], cols_idx[t], values[t])`.
///
/// # Safety
/// The three index/value arrays must each hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn rmc_problem_create_identity(
    m: usize,
    n: usize,
    rows_idx: *const usize,
    cols_idx: *const usize,
    values: *const f64,
    len: usize,
    out: *mut *mut RmcProblem,
) -> RmcStatus {
    guard(|| {
        if rows_idx.is_null() || cols_idx.is_null() || values.is_null() || out.is_null() {
            set_error("null pointer argument".into());
            return RmcStatus::NullPointer;
        }
        let ri = unsafe { slice::from_raw_parts(rows_idx, len) };
        let ci = unsafe { slice::from_raw_parts(cols_idx, len) };
        let vs = unsafe { slice::from_raw_parts(values, len) };
        let triples: Vec<(usize, usize, f64)> =
            ri.iter().zip(ci).zip(vs).map(|((&i, &j), &v)| (i, j, v)).collect();
        match ObservedCoefficients::new(m, n, &triples) {
            Ok(observed) => {
                let basis = ColumnLocalBasis::identity(m, n);
                unsafe { *out = Box::into_raw(Box::new(RmcProblem { observed, basis })) };
                RmcStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `problem` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn rmc_problem_free(problem: *mut RmcProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// The universal regularizer `1/sqrt(max(ln n, 1))`.
#[no_mangle]
pub extern "C" fn rmc_default_lambda(n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        default_lambda(n)
    }
}

/// Solve the convex program. `lambda <= 0` selects the default; `tol <= 0`
/// and `max_iter == 0` select the defaults.
///
/// # Safety
/// `problem` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmc_solve(
    problem: *const RmcProblem,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut RmcSolveResult,
) -> RmcStatus {
    guard(|| {
        let Some(p) = (unsafe { problem.as_ref() }) else {
            set_error("null problem handle".into());
            return RmcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer".into());
            return RmcStatus::NullPointer;
        }
        let mut config = AdmmConfig::default();
        if lambda > 0.0 {
            config.lambda = Some(lambda);
        }
        if tol > 0.0 {
            config.tol = tol;
        }
        if max_iter > 0 {
            config.max_iter = max_iter;
        }
        match admm::solve(&p.observed, &p.basis, &config) {
            Ok(r) => {
                unsafe { *out = Box::into_raw(Box::new(RmcSolveResult(r))) };
                RmcStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `result` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn rmc_solve_result_free(result: *mut RmcSolveResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

#[no_mangle]
pub extern "C" fn rmc_solve_result_iterations(result: *const RmcSolveResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |r| r.0.iterations)
}

#[no_mangle]
pub extern "C" fn rmc_solve_result_converged(result: *const RmcSolveResult) -> bool {
    unsafe { result.as_ref() }.is_some_and(|r| r.0.converged)
}

#[no_mangle]
pub extern "C" fn rmc_solve_result_objective(result: *const RmcSolveResult) -> f64 {
    unsafe { result.as_ref() }.map_or(f64::NAN, |r| r.0.objective)
}

/// Clone the low-rank part into a fresh matrix handle.
///
/// # Safety
/// `result` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmc_solve_result_lowrank(
    result: *const RmcSolveResult,
    out: *mut *mut RmcMatrix,
) -> RmcStatus {
    guard(|| {
        let Some(r) = (unsafe { result.as_ref() }) else {
            set_error("null result handle".into());
            return RmcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer".into());
            return RmcStatus::NullPointer;
        }
        unsafe { *out = Box::into_raw(Box::new(RmcMatrix(r.0.l_star.clone()))) };
        RmcStatus::Ok
    })
}

/// Clone the column-sparse part into a fresh matrix handle.
///
/// # Safety
/// `result` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmc_solve_result_sparse(
    result: *const RmcSolveResult,
    out: *mut *mut RmcMatrix,
) -> RmcStatus {
    guard(|| {
        let Some(r) = (unsafe { result.as_ref() }) else {
            set_error("null result handle".into());
            return RmcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer".into());
            return RmcStatus::NullPointer;
        }
        unsafe { *out = Box::into_raw(Box::new(RmcMatrix(r.0.s_star.clone()))) };
        RmcStatus::Ok
    })
}

/// Run the l2,1 filtering accelerator. `rank == 0` triggers automatic
/// rank estimation.
///
/// # Safety
/// `problem` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmc_filter(
    problem: *const RmcProblem,
    rank: usize,
    seed: u64,
    out: *mut *mut RmcFilterResult,
) -> RmcStatus {
    guard(|| {
        let Some(p) = (unsafe { problem.as_ref() }) else {
            set_error("null problem handle".into());
            return RmcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer".into());
            return RmcStatus::NullPointer;
        }
        let config = FilterConfig {
            rank_estimate: if rank == 0 { None } else { Some(rank) },
            seed,
            ..FilterConfig::default()
        };
        match filter::run(&p.observed, &p.basis, &config) {
            Ok(r) => {
                unsafe { *out = Box::into_raw(Box::new(RmcFilterResult(r))) };
                RmcStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `result` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn rmc_filter_result_free(result: *mut RmcFilterResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

#[no_mangle]
pub extern "C" fn rmc_filter_result_rank(result: *const RmcFilterResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |r| r.0.u_basis.ncols())
}

/// Copy the per-column outlier flags (0/1) into `buffer`.
///
/// # Safety
/// `buffer` must hold at least `len` bytes; `len` should be the column
/// count of the problem.
#[no_mangle]
pub unsafe extern "C" fn rmc_filter_result_flags(
    result: *const RmcFilterResult,
    buffer: *mut u8,
    len: usize,
) -> RmcStatus {
    guard(|| {
        let Some(r) = (unsafe { result.as_ref() }) else {
            set_error("null result handle".into());
            return RmcStatus::NullPointer;
        };
        if buffer.is_null() {
            set_error("null buffer".into());
            return RmcStatus::NullPointer;
        }
        if len < r.0.outlier_flags.len() {
            set_error(format!(
                "buffer holds {len} flags, need {}",
                r.0.outlier_flags.len()
            ));
            return RmcStatus::DimensionMismatch;
        }
        for (t, &f) in r.0.outlier_flags.iter().enumerate() {
            unsafe { *buffer.add(t) = f as u8 };
        }
        RmcStatus::Ok
    })
}

/// Clone the completed matrix (outlier columns zeroed) into a handle.
///
/// # Safety
/// `result` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmc_filter_result_completed(
    result: *const RmcFilterResult,
    out: *mut *mut RmcMatrix,
) -> RmcStatus {
    guard(|| {
        let Some(r) = (unsafe { result.as_ref() }) else {
            set_error("null result handle".into());
            return RmcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer".into());
            return RmcStatus::NullPointer;
        }
        unsafe { *out = Box::into_raw(Box::new(RmcMatrix(r.0.completed.clone()))) };
        RmcStatus::Ok
    })
}

/// `||P_U1 - P_U2||_F` between the column spans of two orthonormal
/// matrices; writes the distance to `out`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmc_subspace_distance(
    u1: *const RmcMatrix,
    u2: *const RmcMatrix,
    out: *mut f64,
) -> RmcStatus {
    guard(|| {
        let (Some(a), Some(b)) = (unsafe { u1.as_ref() }, unsafe { u2.as_ref() }) else {
            set_error("null matrix handle".into());
            return RmcStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer".into());
            return RmcStatus::NullPointer;
        }
        match metrics::subspace_distance(&a.0, &b.0) {
            Ok(d) => {
                unsafe { *out = d };
                RmcStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Cluster the columns of a fully observed matrix into k groups through
/// the LRR affinity. Writes one label per column into `labels`.
///
/// # Safety
/// `labels` must hold at least as many entries as the matrix has columns.
#[no_mangle]
pub unsafe extern "C" fn rmc_cluster(
    matrix: *const RmcMatrix,
    k: usize,
    seed: u64,
    labels: *mut usize,
    len: usize,
) -> RmcStatus {
    guard(|| {
        let Some(m) = (unsafe { matrix.as_ref() }) else {
            set_error("null matrix handle".into());
            return RmcStatus::NullPointer;
        };
        if labels.is_null() {
            set_error("null labels buffer".into());
            return RmcStatus::NullPointer;
        }
        if len < m.0.cols() {
            set_error(format!("labels buffer holds {len}, need {}", m.0.cols()));
            return RmcStatus::DimensionMismatch;
        }
        let z = match cluster::lrr_from_mc(&m.0) {
            Ok(z) => z,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        match cluster::spectral_cluster(&z, k, seed) {
            Ok(ls) => {
                for (t, &l) in ls.iter().enumerate() {
                    unsafe { *labels.add(t) = l };
                }
                RmcStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}
