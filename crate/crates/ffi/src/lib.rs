//! C ABI for todalab: exact scalars, series in the times, and JSON jobs.
//!
//! Every function returns a [`TlStatus`]. On failure the message is available from
//! [`tl_last_error_message`] on the same thread. Strings returned through out
//! pointers are owned by the caller and released with [`tl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use todalab::cli::{run_json, ExitStatus};
use todalab::partitions::Partition;
use todalab::schur::skew_schur_s;
use todalab::tau::{melting_z, melting_zprime, MeltingModel};
use todalab::{Error, ExactScalar, TruncSeries};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DivisionByZero = 4,
    InvalidArgument = 5,
    ComputationFailed = 6,
    VerificationFailed = 7,
    Panic = 8,
}

/// Opaque exact scalar, a rational function of `u = q^{1/24}` and `Q`.
pub struct TlScalar(ExactScalar);

/// Opaque truncated power series in the times.
pub struct TlSeries(TruncSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> TlStatus {
    match e {
        Error::Parse(_) => TlStatus::ParseError,
        Error::DivisionByZero => TlStatus::DivisionByZero,
        Error::InvalidArgument(_) => TlStatus::InvalidArgument,
        _ => TlStatus::ComputationFailed,
    }
}

fn fail(status: TlStatus, msg: impl Into<String>) -> TlStatus {
    set_error(msg);
    status
}

fn guard<F: FnOnce() -> TlStatus + UnwindSafe>(f: F) -> TlStatus {
    match catch_unwind(f) {
        Ok(s) => {
            if s == TlStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(_) => fail(TlStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, TlStatus> {
    if p.is_null() {
        return Err(fail(TlStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(TlStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> TlStatus {
    if out.is_null() {
        return fail(TlStatus::NullPointer, "null output pointer");
    }
    *out = Box::into_raw(Box::new(value));
    TlStatus::Ok
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> TlStatus {
    if out.is_null() {
        return fail(TlStatus::NullPointer, "null output pointer");
    }
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            TlStatus::Ok
        }
        Err(_) => fail(TlStatus::ComputationFailed, "output contains a NUL byte"),
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, TlStatus> {
    p.as_ref().ok_or_else(|| fail(TlStatus::NullPointer, "null handle"))
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

fn lift<T>(r: todalab::Result<T>) -> Result<T, TlStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn tl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a scalar such as `"Q*q^2/(1 - q)"`.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_scalar_parse(src: *const c_char, out: *mut *mut TlScalar) -> TlStatus {
    guard(|| {
        let s = try_ffi!(text(src));
        let v = try_ffi!(lift(s.parse::<ExactScalar>()));
        write_out(out, TlScalar(v))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_scalar_from_int(n: i64, out: *mut *mut TlScalar) -> TlStatus {
    guard(|| write_out(out, TlScalar(ExactScalar::from_int(n))))
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlBinaryOp {
    Add = 0,
    Sub = 1,
    Mul = 2,
    Div = 3,
}

/// `out = a op b`.
///
/// # Safety
/// `a`, `b` must be live scalar handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_scalar_binary(op: TlBinaryOp, a: *const TlScalar, b: *const TlScalar, out: *mut *mut TlScalar) -> TlStatus {
    guard(|| {
        let (x, y) = (&try_ffi!(deref(a)).0, &try_ffi!(deref(b)).0);
        let v = match op {
            TlBinaryOp::Add => x.add(y),
            TlBinaryOp::Sub => x.sub(y),
            TlBinaryOp::Mul => x.mul(y),
            TlBinaryOp::Div => try_ffi!(lift(x.checked_div(y))),
        };
        write_out(out, TlScalar(v))
    })
}

/// Writes 1 to `out` when the scalars are equal, else 0.
///
/// # Safety
/// `a`, `b` must be live scalar handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_scalar_equal(a: *const TlScalar, b: *const TlScalar, out: *mut c_int) -> TlStatus {
    guard(|| {
        let eq = try_ffi!(deref(a)).0 == try_ffi!(deref(b)).0;
        if out.is_null() {
            return fail(TlStatus::NullPointer, "null output pointer");
        }
        *out = c_int::from(eq);
        TlStatus::Ok
    })
}

/// Canonical text form.
///
/// # Safety
/// `a` must be a live scalar handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_scalar_to_string(a: *const TlScalar, out: *mut *mut c_char) -> TlStatus {
    guard(|| write_string(out, try_ffi!(deref(a)).0.to_string()))
}

/// # Safety
/// `a` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_scalar_free(a: *mut TlScalar) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Skew Schur function `S_{λ/μ}(t)` up to weighted degree `cutoff`. `mu` may be NULL.
///
/// # Safety
/// `lambda` must be a NUL-terminated string, `mu` NULL or one, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_series_schur(lambda: *const c_char, mu: *const c_char, cutoff: u32, out: *mut *mut TlSeries) -> TlStatus {
    guard(|| {
        let l: Partition = try_ffi!(lift(try_ffi!(text(lambda)).parse()));
        let m: Partition = if mu.is_null() { Partition::empty() } else { try_ffi!(lift(try_ffi!(text(mu)).parse())) };
        write_out(out, TlSeries(skew_schur_s(&l, &m, cutoff)))
    })
}

/// Melting crystal partition function of `model` (1 or 2) at charge `s`,
/// summed over partitions of weight at most `w`, to degree `d` in the times.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_series_melting_z(model: u8, s: i64, w: u32, d: u32, out: *mut *mut TlSeries) -> TlStatus {
    guard(|| {
        let m = try_ffi!(lift(MeltingModel::from_number(model)));
        let z = match m {
            MeltingModel::One => melting_z(s, w, d),
            MeltingModel::Two => melting_zprime(s, w, d),
        };
        write_out(out, TlSeries(try_ffi!(lift(z))))
    })
}

/// # Safety
/// `a`, `b` must be live series handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_series_mul(a: *const TlSeries, b: *const TlSeries, out: *mut *mut TlSeries) -> TlStatus {
    guard(|| {
        let v = try_ffi!(deref(a)).0.mul(&try_ffi!(deref(b)).0);
        write_out(out, TlSeries(v))
    })
}

/// Coefficient of the empty monomial.
///
/// # Safety
/// `a` must be a live series handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_series_constant_term(a: *const TlSeries, out: *mut *mut TlScalar) -> TlStatus {
    guard(|| write_out(out, TlScalar(try_ffi!(deref(a)).0.constant_term())))
}

/// # Safety
/// `a` must be a live series handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_series_to_string(a: *const TlSeries, out: *mut *mut c_char) -> TlStatus {
    guard(|| write_string(out, try_ffi!(deref(a)).0.to_string()))
}

/// # Safety
/// `a` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_series_free(a: *mut TlSeries) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Runs a JSON job, e.g. `{"command": "verify hirota", "params": {"provider": "cauchy"}}`.
/// The report goes to `out`, the process-style exit code to `exit_code`
/// (0 pass, 1 verification failure, 2 invalid job). A failed verification
/// returns `VerificationFailed` and still fills `out`.
///
/// # Safety
/// `job` must be a NUL-terminated string; `out` and `exit_code` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tl_run_command(job: *const c_char, out: *mut *mut c_char, exit_code: *mut c_int) -> TlStatus {
    guard(|| {
        let j = try_ffi!(text(job));
        if exit_code.is_null() {
            return fail(TlStatus::NullPointer, "null exit code pointer");
        }
        let o = run_json(j);
        *exit_code = o.status as c_int;
        let st = write_string(out, o.stdout);
        if st != TlStatus::Ok {
            return st;
        }
        match o.status {
            ExitStatus::Pass => TlStatus::Ok,
            ExitStatus::VerificationFailure => fail(TlStatus::VerificationFailed, o.stderr.trim_end()),
            ExitStatus::UsageError => fail(TlStatus::InvalidArgument, o.stderr.trim_end()),
        }
    })
}
