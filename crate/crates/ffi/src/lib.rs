//! C ABI over `topoqfi`.
//!
//! Every fallible call returns a status code (`TQ_OK` on success) and writes
//! results through out-pointers. The message of the most recent failure on
//! the calling thread is available from `tq_last_error_message`. Models are
//! opaque handles created by `tq_model_new` and released by `tq_model_free`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use topoqfi::edge::numeric_edge_information;
use topoqfi::estimation::default_step;
use topoqfi::many_body::{qfi_obc_projector, GAP_FLOOR};
use topoqfi::measure::SimConfig;
use topoqfi::scaling::FitFlag;
use topoqfi::{Error, ModelFamily, ScalingSeries};

pub const TQ_OK: i32 = 0;
pub const TQ_ERR_NULL_POINTER: i32 = 1;
pub const TQ_ERR_INVALID_UTF8: i32 = 2;
pub const TQ_ERR_SHAPE_MISMATCH: i32 = 3;
pub const TQ_ERR_NON_HERMITIAN: i32 = 4;
pub const TQ_ERR_CONVERGENCE: i32 = 5;
pub const TQ_ERR_INVALID_OCCUPATION: i32 = 6;
pub const TQ_ERR_INVALID_SIZE: i32 = 7;
pub const TQ_ERR_INVALID_PARAMS: i32 = 8;
pub const TQ_ERR_NEGATIVE_RESULT: i32 = 9;
pub const TQ_ERR_DEGENERATE_DISTRIBUTION: i32 = 10;
pub const TQ_ERR_STATE_CROSSING: i32 = 11;
pub const TQ_ERR_INVALID_Z: i32 = 12;
pub const TQ_ERR_INVALID_R: i32 = 13;
pub const TQ_ERR_OUTSIDE_TOPOLOGICAL_PHASE: i32 = 14;
pub const TQ_ERR_NO_GAP_ISOLATION: i32 = 15;
pub const TQ_ERR_NO_LOWER_BAND: i32 = 16;
pub const TQ_ERR_NON_MONOTONIC: i32 = 17;
pub const TQ_ERR_NOT_A_PROJECTOR: i32 = 18;
pub const TQ_ERR_ALL_EXCLUDED: i32 = 19;
pub const TQ_ERR_ODD_L: i32 = 20;
pub const TQ_ERR_AT_CRITICALITY: i32 = 21;
pub const TQ_ERR_GAPLESS_INPUT: i32 = 22;
pub const TQ_ERR_DIMENSION_MISMATCH: i32 = 23;
pub const TQ_ERR_ILL_CONDITIONED: i32 = 24;
pub const TQ_ERR_FLAT_LIKELIHOOD: i32 = 25;
pub const TQ_ERR_INVALID_CONFIG: i32 = 26;
pub const TQ_ERR_PANIC: i32 = 99;

/// Bits of `TqFit::flags`.
pub const TQ_FIT_DEGENERATE: u32 = 1;
pub const TQ_FIT_AT_BOUNDARY: u32 = 2;

/// Opaque model handle.
pub struct TqModel {
    family: ModelFamily,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TqEdgeInfo {
    pub qfi: f64,
    pub cfi_position: f64,
    /// 1 when the selected state is an edge state, 0 for the bulk fallback.
    pub is_edge: i32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TqFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rms_residual: f64,
    pub relative_residual: f64,
    pub flags: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TqEstimate {
    pub lambda_hat_mean: f64,
    pub sample_variance: f64,
    pub predicted_crb: f64,
    pub ratio: f64,
    pub run_failures: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> i32 {
    match e {
        Error::ShapeMismatch(_) => TQ_ERR_SHAPE_MISMATCH,
        Error::NonHermitianInput { .. } => TQ_ERR_NON_HERMITIAN,
        Error::ConvergenceFailure => TQ_ERR_CONVERGENCE,
        Error::InvalidOccupation { .. } => TQ_ERR_INVALID_OCCUPATION,
        Error::InvalidSize(_) => TQ_ERR_INVALID_SIZE,
        Error::InvalidParams(_) => TQ_ERR_INVALID_PARAMS,
        Error::NegativeResult(_) => TQ_ERR_NEGATIVE_RESULT,
        Error::DegenerateDistribution => TQ_ERR_DEGENERATE_DISTRIBUTION,
        Error::StateCrossing { .. } => TQ_ERR_STATE_CROSSING,
        Error::InvalidZ(_) => TQ_ERR_INVALID_Z,
        Error::InvalidR(_) => TQ_ERR_INVALID_R,
        Error::OutsideTopologicalPhase(_) => TQ_ERR_OUTSIDE_TOPOLOGICAL_PHASE,
        Error::NoGapIsolation => TQ_ERR_NO_GAP_ISOLATION,
        Error::NoLowerBand => TQ_ERR_NO_LOWER_BAND,
        Error::NonMonotonic => TQ_ERR_NON_MONOTONIC,
        Error::NotAProjector(_) => TQ_ERR_NOT_A_PROJECTOR,
        Error::AllExcluded => TQ_ERR_ALL_EXCLUDED,
        Error::OddL(_) => TQ_ERR_ODD_L,
        Error::AtCriticality(_) => TQ_ERR_AT_CRITICALITY,
        Error::GaplessInput(_) => TQ_ERR_GAPLESS_INPUT,
        Error::DimensionMismatch(_) => TQ_ERR_DIMENSION_MISMATCH,
        Error::IllConditioned(_) => TQ_ERR_ILL_CONDITIONED,
        Error::FlatLikelihood => TQ_ERR_FLAT_LIKELIHOOD,
        Error::InvalidConfig(_) => TQ_ERR_INVALID_CONFIG,
    }
}

enum Failure {
    Lib(Error),
    Code(i32, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null() -> Failure {
    Failure::Code(TQ_ERR_NULL_POINTER, "null pointer argument".into())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            TQ_OK
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Code(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(_) => {
            set_last_error("internal panic".into());
            TQ_ERR_PANIC
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn family<'a>(m: *const TqModel) -> Result<&'a ModelFamily, Failure> {
    m.as_ref().map(|m| &m.family).ok_or_else(null)
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure::Code(TQ_ERR_INVALID_UTF8, "string is not UTF-8".into()))
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Creates a model from its identifier ("ssh", "chern-wire", "chern-bloch",
/// "band-inversion") and `n_params` optional named parameters.
///
/// # Safety
/// `id` must be a NUL-terminated string; `keys` and `values` must point to
/// `n_params` entries (they may be null when `n_params` is 0); `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tq_model_new(
    id: *const c_char,
    keys: *const *const c_char,
    values: *const f64,
    n_params: usize,
    out: *mut *mut TqModel,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let id = str_arg(id)?;
        let keys = slice_arg(keys, n_params)?;
        let values = slice_arg(values, n_params)?;
        let mut params = BTreeMap::new();
        for (&k, &v) in keys.iter().zip(values) {
            params.insert(str_arg(k)?.to_string(), v);
        }
        let family = ModelFamily::from_id(id, &params)?;
        write(out, Box::into_raw(Box::new(TqModel { family })))
    })
}

/// # Safety
/// `model` must come from `tq_model_new` and not have been freed; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn tq_model_free(model: *mut TqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be writable for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn tq_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// QFI and position CFI of the edge (or fallback bulk) state, by central
/// difference with the default step.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tq_edge_qfi(model: *const TqModel, lambda: f64, l: usize, out: *mut TqEdgeInfo) -> i32 {
    guard(|| {
        let info = numeric_edge_information(family(model)?, lambda, l, default_step(lambda))?;
        let is_edge = i32::from(info.kind == topoqfi::edge::StateKind::Edge);
        write(out, TqEdgeInfo { qfi: info.qfi, cfi_position: info.cfi_position, is_edge })
    })
}

/// Edge QFI of the SSH chain from the closed form (|λ| < 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tq_ssh_edge_qfi(lambda: f64, l: usize, out: *mut f64) -> i32 {
    guard(|| write(out, topoqfi::ssh_edge_qfi(lambda, l)?))
}

/// QFI of the normalized geometric state with real ratio r and ∂r = `dr`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tq_phi_z_qfi(r: f64, dr: f64, l: usize, out: *mut f64) -> i32 {
    guard(|| write(out, topoqfi::qfi_phi_z_closed_form(r, dr, l)?))
}

/// (L² − 1)(∂r² + ∂θ²)/3.
#[no_mangle]
pub extern "C" fn tq_tpt_limit(dr: f64, dtheta: f64, l: usize) -> f64 {
    topoqfi::qfi_tpt_limit(dr, dtheta, l)
}

/// Σ_k lower-band QFI over the periodic grid.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tq_pbc_qfi(model: *const TqModel, lambda: f64, l: usize, out: *mut f64) -> i32 {
    guard(|| write(out, topoqfi::qfi_pbc_sum(family(model)?, lambda, l, GAP_FLOOR)?.total))
}

/// Half-filled open-boundary ground-state QFI via the projector route.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tq_obc_qfi(model: *const TqModel, lambda: f64, l: usize, out: *mut f64) -> i32 {
    guard(|| write(out, qfi_obc_projector(family(model)?, lambda, l, default_step(lambda))?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tq_ssh_tpt_closed_form(l: usize, out: *mut f64) -> i32 {
    guard(|| write(out, topoqfi::ssh_tpt_closed_form(l)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tq_ssh_continuum_limit(lambda: f64, out: *mut f64) -> i32 {
    guard(|| write(out, topoqfi::ssh_continuum_limit(lambda)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tq_chern_tpt_sum(l: usize, t1: f64, t2: f64, out: *mut f64) -> i32 {
    guard(|| write(out, topoqfi::chern_tpt_sum(l, t1, t2)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tq_band_inversion_lowest_modes(
    l: usize,
    alpha: f64,
    lambda: f64,
    lambda_c: f64,
    out: *mut f64,
) -> i32 {
    guard(|| write(out, topoqfi::band_inversion_lowest_modes(l, alpha, lambda, lambda_c)?))
}

/// Fits values ≈ a·L^b + c with b restricted to [b_lo, b_hi].
///
/// # Safety
/// `sizes` and `values` must point to `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tq_fit_power_law(
    sizes: *const usize,
    values: *const f64,
    n: usize,
    b_lo: f64,
    b_hi: f64,
    out: *mut TqFit,
) -> i32 {
    guard(|| {
        let samples = slice_arg(sizes, n)?.iter().copied().zip(slice_arg(values, n)?.iter().copied()).collect();
        let fit = topoqfi::fit_power_law(&ScalingSeries::new(samples, "ffi")?, (b_lo, b_hi))?;
        let flags = fit.flags.iter().fold(0, |acc, f| {
            acc | match f {
                FitFlag::Degenerate => TQ_FIT_DEGENERATE,
                FitFlag::AtBoundary => TQ_FIT_AT_BOUNDARY,
            }
        });
        write(
            out,
            TqFit {
                a: fit.a,
                b: fit.b,
                c: fit.c,
                rms_residual: fit.rms_residual,
                relative_residual: fit.relative_residual,
                flags,
            },
        )
    })
}

/// Monte-Carlo MLE study: `reps` experiments of `samples` position
/// measurements at `lambda_true`, estimates restricted to [lo, hi].
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tq_estimate(
    model: *const TqModel,
    lambda_true: f64,
    l: usize,
    samples: u64,
    reps: usize,
    seed: u64,
    lo: f64,
    hi: f64,
    out: *mut TqEstimate,
) -> i32 {
    guard(|| {
        let cfg = SimConfig { samples, reps, seed, lambda_true, interval: (lo, hi), l, family: family(model)?.clone() };
        let r = topoqfi::estimator_stats(&cfg)?;
        write(
            out,
            TqEstimate {
                lambda_hat_mean: r.lambda_hat_mean,
                sample_variance: r.sample_variance,
                predicted_crb: r.predicted_crb,
                ratio: r.ratio,
                run_failures: r.run_failures,
            },
        )
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
