//! C ABI over `kbz-core`.
//!
//! Objects are opaque heap handles created by `*_new` and released by
//! `*_free`. Every fallible call returns a [`KbzStatus`]; on failure a
//! description is available from [`kbz_last_error_message`] on the same thread.
//! Output buffers are caller-allocated and their lengths are checked.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use kbz_core::experiments::pseudo_inverse_solution;
use kbz_core::problem::{ProblemInstance, ProblemKind};
use kbz_core::solvers::{run, Method, SolverConfig, TraceOptions};
use kbz_core::{DenseMatrix, Error, ObjectiveSpec};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbzStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidState = 2,
    InvalidConfig = 3,
    UnsupportedScale = 4,
    NoNoisePossible = 5,
    Format = 6,
    Parse = 7,
    Io = 8,
    NullPointer = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Dense row-major matrix.
pub struct KbzMatrix {
    inner: DenseMatrix,
}

/// Solver settings: method, objective and stopping rule.
pub struct KbzConfig {
    inner: SolverConfig,
}

/// Summary of a finished solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KbzSolveInfo {
    pub iterations: u64,
    /// 1 when the tolerance was reached, 0 when the iteration cap stopped the run.
    pub converged: i32,
    /// Relative error against the reference, or NaN without one.
    pub final_rel_err: f64,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> KbzStatus {
    match err {
        Error::InvalidArgument(_) => KbzStatus::InvalidArgument,
        Error::InvalidState(_) => KbzStatus::InvalidState,
        Error::InvalidConfig(_) => KbzStatus::InvalidConfig,
        Error::UnsupportedScale(_) => KbzStatus::UnsupportedScale,
        Error::NoNoisePossible { .. } => KbzStatus::NoNoisePossible,
        Error::Format { .. } => KbzStatus::Format,
        Error::Parse { .. } => KbzStatus::Parse,
        Error::Io(_) => KbzStatus::Io,
    }
}

struct Failure(KbzStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KbzStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KbzStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            KbzStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(KbzStatus::NullPointer, format!("{what} is null"))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn kbz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kbz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kbz_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut KbzMatrix,
) -> KbzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = rows.checked_mul(cols).ok_or_else(|| {
            Failure(KbzStatus::InvalidArgument, "matrix size overflows".into())
        })?;
        let values = input(data, len, "data")?.to_vec();
        let m = DenseMatrix::new(rows, cols, values)?;
        *out = Box::into_raw(Box::new(KbzMatrix { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or a handle from [`kbz_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kbz_matrix_free(matrix: *mut KbzMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// # Safety
/// `matrix` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn kbz_matrix_rows(matrix: *const KbzMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.inner.rows())
}

/// # Safety
/// `matrix` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn kbz_matrix_cols(matrix: *const KbzMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.inner.cols())
}

/// Creates a configuration for `method` (e.g. `"arabebk"`). `lambda > 0`
/// selects the elastic-net objective, `lambda == 0` the quadratic one.
///
/// # Safety
/// `method` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kbz_config_new(
    method: *const c_char,
    lambda: f64,
    out: *mut *mut KbzConfig,
) -> KbzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if method.is_null() {
            return Err(null("method"));
        }
        let name = CStr::from_ptr(method).to_str().map_err(|_| {
            Failure(KbzStatus::InvalidArgument, "method name is not UTF-8".into())
        })?;
        let method: Method = name.parse()?;
        let objective = if lambda == 0.0 {
            ObjectiveSpec::Quadratic
        } else {
            ObjectiveSpec::elastic_net(lambda)?
        };
        let cfg = SolverConfig::new(method, objective).trace(TraceOptions {
            stride: usize::MAX,
            bregman: false,
            dual_residual: false,
        });
        *out = Box::into_raw(Box::new(KbzConfig { inner: cfg }));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from [`kbz_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kbz_config_free(config: *mut KbzConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn with_config(config: *mut KbzConfig, f: impl FnOnce(&mut SolverConfig)) -> KbzStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = c.inner.clone();
        f(&mut next);
        next.validate()?;
        c.inner = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kbz_config_set_tau(config: *mut KbzConfig, tau: usize) -> KbzStatus {
    with_config(config, |c| c.tau = tau)
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kbz_config_set_deltas(
    config: *mut KbzConfig,
    delta_z: f64,
    delta_x: f64,
) -> KbzStatus {
    with_config(config, |c| {
        c.delta_z = delta_z;
        c.delta_x = delta_x;
    })
}

/// A tolerance `<= 0` disables tolerance-based stopping.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kbz_config_set_tol(config: *mut KbzConfig, tol: f64) -> KbzStatus {
    with_config(config, |c| c.tol = (tol > 0.0).then_some(tol))
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kbz_config_set_max_iters(
    config: *mut KbzConfig,
    max_iters: u64,
) -> KbzStatus {
    with_config(config, |c| c.max_iters = usize::try_from(max_iters).unwrap_or(usize::MAX))
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kbz_config_set_seed(config: *mut KbzConfig, seed: u64) -> KbzStatus {
    with_config(config, |c| c.seed = seed)
}

/// Solves `A x ~ b`, writing `x` (length `cols`) into `x_out`.
///
/// `reference` (length `cols`) may be null; tolerance-based stopping then
/// requires the tolerance to be disabled.
///
/// # Safety
/// All non-null pointers must reference buffers of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn kbz_solve(
    matrix: *const KbzMatrix,
    config: *const KbzConfig,
    b: *const f64,
    b_len: usize,
    reference: *const f64,
    x_out: *mut f64,
    x_len: usize,
    info: *mut KbzSolveInfo,
) -> KbzStatus {
    guard(|| {
        let a = &matrix.as_ref().ok_or_else(|| null("matrix"))?.inner;
        let cfg = &config.as_ref().ok_or_else(|| null("config"))?.inner;
        if x_out.is_null() {
            return Err(null("x_out"));
        }
        if x_len < a.cols() {
            return Err(Failure(
                KbzStatus::BufferTooSmall,
                format!("x_out holds {x_len} values, {} needed", a.cols()),
            ));
        }
        let b = input(b, b_len, "b")?.to_vec();
        let kind = match cfg.objective {
            ObjectiveSpec::Quadratic => ProblemKind::MinNormLeastSquares,
            ObjectiveSpec::ElasticNet { lambda } => ProblemKind::SparseLeastSquares { lambda },
        };
        let mut problem = ProblemInstance::new(a.clone(), b, kind)?;
        if !reference.is_null() {
            let r = slice::from_raw_parts(reference, a.cols()).to_vec();
            problem = problem.with_reference(r)?;
        }
        let outcome = run(cfg, &problem)?;
        slice::from_raw_parts_mut(x_out, a.cols()).copy_from_slice(&outcome.state.x_primal);
        if let Some(info) = info.as_mut() {
            *info = KbzSolveInfo {
                iterations: outcome.iterations as u64,
                converged: outcome.converged() as i32,
                final_rel_err: outcome.final_rel_err.unwrap_or(f64::NAN),
                setup_seconds: outcome.setup_seconds,
                solve_seconds: outcome.solve_seconds,
            };
        }
        Ok(())
    })
}

/// Minimum-norm least-squares solution `A^+ b`, written into `x_out`.
///
/// # Safety
/// All pointers must reference buffers of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn kbz_pseudo_inverse_solution(
    matrix: *const KbzMatrix,
    b: *const f64,
    b_len: usize,
    x_out: *mut f64,
    x_len: usize,
) -> KbzStatus {
    guard(|| {
        let a = &matrix.as_ref().ok_or_else(|| null("matrix"))?.inner;
        if x_out.is_null() {
            return Err(null("x_out"));
        }
        if x_len < a.cols() {
            return Err(Failure(
                KbzStatus::BufferTooSmall,
                format!("x_out holds {x_len} values, {} needed", a.cols()),
            ));
        }
        let x = pseudo_inverse_solution(a, input(b, b_len, "b")?)?;
        slice::from_raw_parts_mut(x_out, x.len()).copy_from_slice(&x);
        Ok(())
    })
}
