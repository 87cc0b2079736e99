//! C interface to `fk-cim`.
//!
//! Every function returns an [`FkStatus`]; on failure the message is kept per
//! thread and can be copied out with [`fk_last_error_message`]. Solvers are
//! opaque handles created by [`fk_solver_new`] and released by
//! [`fk_solver_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fk_cim::{
    occupation_average, tm_solve, ContourKind, FkError, FkModel, FkParams, OccupationConfig, SolverOptions,
    TmGrid, TmScheme, WindowSolver,
};
use num_complex::Complex64;

/// Result codes. Values 0–5 match the exit codes of the `fk-cim` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkStatus {
    Ok = 0,
    Error = 1,
    InvalidInput = 2,
    ContourFailure = 3,
    SingularStep = 4,
    Overflow = 5,
    NullPointer = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkContour {
    Parabolic = 0,
    Hyperbolic = 1,
}

impl From<FkContour> for ContourKind {
    fn from(c: FkContour) -> Self {
        match c {
            FkContour::Parabolic => ContourKind::Parabolic,
            FkContour::Hyperbolic => ContourKind::Hyperbolic,
        }
    }
}

/// Model parameters; field meanings as in the Rust `FkParams`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkParamsC {
    pub p: f64,
    pub b: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub binv1: f64,
    pub binv2: f64,
    pub u1: f64,
    pub u2: f64,
    pub rho: f64,
    pub g10: f64,
    pub g20: f64,
}

impl From<FkParamsC> for FkParams {
    fn from(c: FkParamsC) -> Self {
        FkParams {
            p: c.p,
            b: c.b,
            alpha1: c.alpha1,
            alpha2: c.alpha2,
            binv1: c.binv1,
            binv2: c.binv2,
            u1: c.u1,
            u2: c.u2,
            rho: c.rho,
            g10: c.g10,
            g20: c.g20,
        }
    }
}

impl From<FkParams> for FkParamsC {
    fn from(p: FkParams) -> Self {
        FkParamsC {
            p: p.p,
            b: p.b,
            alpha1: p.alpha1,
            alpha2: p.alpha2,
            binv1: p.binv1,
            binv2: p.binv2,
            u1: p.u1,
            u2: p.u2,
            rho: p.rho,
            g10: p.g10,
            g20: p.g20,
        }
    }
}

/// Opaque solver for one time window.
pub struct FkSolver {
    inner: WindowSolver,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Core(FkError),
    Null(&'static str),
    Small { name: &'static str, need: usize, got: usize },
}

impl From<FkError> for Failure {
    fn from(e: FkError) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &FkError) -> FkStatus {
    match e.exit_code() {
        2 => FkStatus::InvalidInput,
        3 => FkStatus::ContourFailure,
        4 => FkStatus::SingularStep,
        5 => FkStatus::Overflow,
        _ => FkStatus::Error,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FkStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer passed for `{name}`"));
            FkStatus::NullPointer
        }
        Ok(Err(Failure::Small { name, need, got })) => {
            set_error(format!("buffer `{name}` holds {got} values, {need} required"));
            FkStatus::BufferTooSmall
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            FkStatus::Panic
        }
    }
}

unsafe fn read<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn write<T>(p: *mut T, name: &'static str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the full message length
/// including the terminator, or 0 if the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the default example parameter set to `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fk_params_example(out: *mut FkParamsC) -> FkStatus {
    guard(|| write(out, "out", FkParams::example_one().into()))
}

/// Checks `params` without building anything.
///
/// # Safety
/// `params` must be null or point to a valid struct.
#[no_mangle]
pub unsafe extern "C" fn fk_params_validate(params: *const FkParamsC) -> FkStatus {
    guard(|| {
        FkParams::from(*read(params, "params")?).validate()?;
        Ok(())
    })
}

/// Laplace-space solution at `z = re + i·im`; `out` receives
/// `[Re Ĝ₁, Im Ĝ₁, Re Ĝ₂, Im Ĝ₂]`.
///
/// # Safety
/// `params` must be valid; `out` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn fk_g_hat(params: *const FkParamsC, re: f64, im: f64, out: *mut f64) -> FkStatus {
    guard(|| {
        let model = FkModel::new((*read(params, "params")?).into())?;
        let v = model.g_hat(Complex64::new(re, im))?;
        slice_mut(out, 4, "out")?.copy_from_slice(&[v.g1.re, v.g1.im, v.g2.re, v.g2.im]);
        Ok(())
    })
}

/// Builds a validated contour solver for the window `[t0, t1]` with `n`
/// nodes and default shape parameters. On success `*out` owns the handle.
///
/// # Safety
/// `params` must be valid; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fk_solver_new(
    params: *const FkParamsC,
    contour: FkContour,
    n: usize,
    t0: f64,
    t1: f64,
    out: *mut *mut FkSolver,
) -> FkStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let params: FkParams = (*read(params, "params")?).into();
        let inner = WindowSolver::new(&params, contour.into(), n, t0, t1, &SolverOptions::default())?;
        *out = Box::into_raw(Box::new(FkSolver { inner }));
        Ok(())
    })
}

/// Releases a solver. Null is ignored.
///
/// # Safety
/// `solver` must come from [`fk_solver_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fk_solver_free(solver: *mut FkSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Evaluates `G₁, G₂` at `len` times.
///
/// # Safety
/// `solver` must be a live handle; `times`, `g1`, `g2` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fk_solver_evaluate(
    solver: *const FkSolver,
    times: *const f64,
    len: usize,
    g1: *mut f64,
    g2: *mut f64,
) -> FkStatus {
    guard(|| {
        let s = &read(solver, "solver")?.inner;
        let times = slice(times, len, "times")?;
        let g1 = slice_mut(g1, len, "g1")?;
        let g2 = slice_mut(g2, len, "g2")?;
        for (i, &t) in times.iter().enumerate() {
            let v = s.evaluate(t)?;
            g1[i] = v.g1;
            g2[i] = v.g2;
        }
        Ok(())
    })
}

/// Round-off floor `100 ε e^{Re(z₀) t₁}` of the solver's contour.
///
/// # Safety
/// `solver` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fk_solver_roundoff_floor(solver: *const FkSolver, out: *mut f64) -> FkStatus {
    guard(|| write(out, "out", read(solver, "solver")?.inner.roundoff_floor()))
}

/// Time-marching solution on `m` uniform steps over `[0, t_end]`. The three
/// buffers receive `m + 1` values each; `len` is their capacity.
///
/// # Safety
/// `params` must be valid; `t`, `g1`, `g2` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fk_tm_solve(
    params: *const FkParamsC,
    t_end: f64,
    m: usize,
    t: *mut f64,
    g1: *mut f64,
    g2: *mut f64,
    len: usize,
) -> FkStatus {
    guard(|| {
        let params: FkParams = (*read(params, "params")?).into();
        let need = m.saturating_add(1);
        if len < need {
            return Err(Failure::Small { name: "t/g1/g2", need, got: len });
        }
        let (t, g1, g2) = (slice_mut(t, need, "t")?, slice_mut(g1, need, "g1")?, slice_mut(g2, need, "g2")?);
        let samples = tm_solve(&params, TmGrid::new(t_end, m)?, TmScheme::default())?;
        for (i, s) in samples.iter().enumerate() {
            t[i] = s.t;
            g1[i] = s.g1;
            g2[i] = s.g2;
        }
        Ok(())
    })
}

/// Mean occupation time of `state` (1 or 2) at ascending `times`, using the
/// transition data of `params` with ρ = 0 and the shared order `alpha`.
///
/// # Safety
/// `params` must be valid; `times` and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fk_occupation(
    params: *const FkParamsC,
    state: u8,
    eps1: f64,
    eps2: f64,
    alpha: f64,
    lambda: f64,
    contour: FkContour,
    n: usize,
    times: *const f64,
    len: usize,
    out: *mut f64,
) -> FkStatus {
    guard(|| {
        let params: FkParams = (*read(params, "params")?).into();
        let cfg = OccupationConfig {
            state,
            eps1,
            eps2,
            alpha,
            lambda,
            times: slice(times, len, "times")?.to_vec(),
        };
        let out = slice_mut(out, len, "out")?;
        let samples = occupation_average(&cfg, &params, contour.into(), n, &SolverOptions::default())?;
        for (o, s) in out.iter_mut().zip(&samples) {
            *o = s.mean;
        }
        Ok(())
    })
}
