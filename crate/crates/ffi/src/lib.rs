//! C ABI for `padyn`.
//!
//! Objects cross the boundary as opaque handles created by `pdyn_*_new` or
//! `pdyn_*_parse` and released by the matching `pdyn_*_free`. Every fallible
//! call returns a [`PdynStatus`]; on failure the message is available from
//! [`pdyn_last_error_message`] on the same thread. Strings handed out by the
//! library are released with [`pdyn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use padyn::dynamics::{parse_map, DynamicMap};
use padyn::experiment::{self, ExperimentConfig};
use padyn::{Error, PAdic, PrecisionContext};

/// Status codes; `PDYN_STATUS_OK` is zero.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    BadParams = 4,
    PrimeMismatch = 5,
    Window = 6,
    Precision = 7,
    /// `pdyn_run_json` ran but an asserted invariant failed.
    InvariantFailed = 8,
    Panic = 9,
    Other = 10,
}

/// Precision context (ℤ_p or a ℚ_p window).
pub struct PdynContext(PrecisionContext);

/// Truncated p-adic number.
pub struct PdynPAdic(PAdic);

/// A map built from a spec string.
pub struct PdynMap(DynamicMap);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> PdynStatus {
    match e {
        Error::Parse { .. } | Error::UnknownMap(_) => PdynStatus::Parse,
        Error::PrimeMismatch(..) => PdynStatus::PrimeMismatch,
        Error::WindowViolation(_) => PdynStatus::Window,
        Error::PrecisionExhausted(_) | Error::BudgetExceeded { .. } => PdynStatus::Precision,
        Error::BadParams(_) | Error::AlphabetViolation { .. } | Error::DeltaTooSmall(_) => PdynStatus::BadParams,
        _ => PdynStatus::Other,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (PdynStatus, String)>) -> PdynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PdynStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside padyn");
            PdynStatus::Panic
        }
    }
}

fn lib(e: Error) -> (PdynStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, (PdynStatus, String)> {
    if s.is_null() {
        return Err((PdynStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (PdynStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PdynStatus, String)> {
    p.as_ref().ok_or_else(|| (PdynStatus::NullPointer, format!("null {what}")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (PdynStatus, String)> {
    if out.is_null() {
        return Err((PdynStatus::NullPointer, "null output pointer".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (PdynStatus, String)> {
    if out.is_null() {
        return Err((PdynStatus::NullPointer, "null output pointer".into()));
    }
    *out = CString::new(s).map_err(|_| (PdynStatus::Other, "interior NUL".to_string()))?.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pdyn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pdyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pdyn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_context_new_zp(p: u32, n: u32, out: *mut *mut PdynContext) -> PdynStatus {
    guard(|| put(out, PdynContext(PrecisionContext::zp(p, n).map_err(lib)?)))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_context_new_qp(
    p: u32,
    n: u32,
    u_min: i32,
    u_max: i32,
    out: *mut *mut PdynContext,
) -> PdynStatus {
    guard(|| put(out, PdynContext(PrecisionContext::qp(p, n, u_min, u_max).map_err(lib)?)))
}

/// # Safety
/// `ctx` must be NULL or a handle from `pdyn_context_new_*`, freed once.
#[no_mangle]
pub unsafe extern "C" fn pdyn_context_free(ctx: *mut PdynContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Parses the text form `p:<prime>;u:<exponent>;d:<digits>`.
///
/// # Safety
/// `s` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_padic_parse(s: *const c_char, out: *mut *mut PdynPAdic) -> PdynStatus {
    guard(|| put(out, PdynPAdic(PAdic::parse(text(s)?).map_err(lib)?)))
}

/// The integer `value` with as many digits as the prime allows.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_padic_from_i64(p: u32, value: i64, out: *mut *mut PdynPAdic) -> PdynStatus {
    guard(|| {
        if !padyn::padic::is_prime(p) {
            return Err((PdynStatus::BadParams, format!("{p} is not prime")));
        }
        put(out, PdynPAdic(PAdic::constant(p, value)))
    })
}

/// # Safety
/// `x` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_padic_format(x: *const PdynPAdic, out: *mut *mut c_char) -> PdynStatus {
    guard(|| put_string(out, get(x, "p-adic")?.0.to_text()))
}

unsafe fn binary(
    a: *const PdynPAdic,
    b: *const PdynPAdic,
    out: *mut *mut PdynPAdic,
    op: fn(&PAdic, &PAdic) -> padyn::Result<PAdic>,
) -> PdynStatus {
    guard(|| {
        let (a, b) = (get(a, "p-adic")?, get(b, "p-adic")?);
        put(out, PdynPAdic(op(&a.0, &b.0).map_err(lib)?))
    })
}

/// # Safety
/// `a`, `b` must be valid handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_padic_add(a: *const PdynPAdic, b: *const PdynPAdic, out: *mut *mut PdynPAdic) -> PdynStatus {
    binary(a, b, out, PAdic::checked_add)
}

/// # Safety
/// `a`, `b` must be valid handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_padic_sub(a: *const PdynPAdic, b: *const PdynPAdic, out: *mut *mut PdynPAdic) -> PdynStatus {
    binary(a, b, out, PAdic::checked_sub)
}

/// # Safety
/// `a`, `b` must be valid handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_padic_mul(a: *const PdynPAdic, b: *const PdynPAdic, out: *mut *mut PdynPAdic) -> PdynStatus {
    binary(a, b, out, PAdic::checked_mul)
}

/// `‖x‖ = p^-k`: writes `k` and clears `is_zero`, or sets `is_zero` when `x`
/// is zero to its precision (then `k` is the precision).
///
/// # Safety
/// `x` must be a valid handle; `k` and `is_zero` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pdyn_padic_norm_exponent(x: *const PdynPAdic, k: *mut i32, is_zero: *mut bool) -> PdynStatus {
    guard(|| {
        let x = get(x, "p-adic")?;
        if k.is_null() || is_zero.is_null() {
            return Err((PdynStatus::NullPointer, "null output pointer".into()));
        }
        match x.0.valuation() {
            Some(v) => {
                *k = v;
                *is_zero = false;
            }
            None => {
                *k = x.0.prec();
                *is_zero = true;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `x` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pdyn_padic_free(x: *mut PdynPAdic) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// Builds a map from a spec such as `shift_zp` or `affine(v=3, w=1)`.
///
/// # Safety
/// `ctx` must be a valid handle, `spec` a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_map_new(ctx: *const PdynContext, spec: *const c_char, out: *mut *mut PdynMap) -> PdynStatus {
    guard(|| {
        let ctx = get(ctx, "context")?;
        put(out, PdynMap(parse_map(text(spec)?, &ctx.0).map_err(lib)?))
    })
}

/// # Safety
/// `map`, `x` must be valid handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_map_eval(map: *const PdynMap, x: *const PdynPAdic, out: *mut *mut PdynPAdic) -> PdynStatus {
    guard(|| {
        let (m, x) = (get(map, "map")?, get(x, "p-adic")?);
        put(out, PdynPAdic(m.0.eval(&x.0).map_err(lib)?))
    })
}

/// # Safety
/// `map` must be NULL or a handle from `pdyn_map_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn pdyn_map_free(map: *mut PdynMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Runs a JSON experiment configuration and writes the JSON report.
///
/// Returns `PDYN_STATUS_INVARIANT_FAILED` (with the report written) when an
/// asserted invariant fails.
///
/// # Safety
/// `config` must be a NUL-terminated string and `report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pdyn_run_json(config: *const c_char, report: *mut *mut c_char) -> PdynStatus {
    let mut passed = true;
    let status = guard(|| {
        let cfg: ExperimentConfig =
            serde_json::from_str(text(config)?).map_err(|e| (PdynStatus::Parse, e.to_string()))?;
        let r = experiment::run(&cfg).map_err(lib)?;
        passed = r.passed;
        let json = serde_json::to_string(&r).map_err(|e| (PdynStatus::Other, e.to_string()))?;
        put_string(report, json)
    });
    if status == PdynStatus::Ok && !passed {
        set_error("an asserted invariant failed; see the report summary");
        return PdynStatus::InvariantFailed;
    }
    status
}
