//! C ABI for the statistical-query sampling laboratory.
//!
//! Handles are opaque pointers owned by the library; every function returns a
//! status code and writes results through out-pointers. Strings returned
//! through `char**` are owned by the library and must be released with
//! [`sqslab_string_free`].

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sqslab::domain::{BitVector, Domain, Point, Predicate, ZpVector};
use sqslab::fourier::{wht, TruthTable};
use sqslab::harness::verify::{verify_lemmas, VerifyScale};
use sqslab::harness::{run_experiment, ExperimentConfig, PredicateSpec};
use sqslab::quantum;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SqsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DomainError = 3,
    ResourceLimit = 4,
    BudgetViolation = 5,
    SessionExhausted = 6,
    ProtocolError = 7,
    CheckFailed = 8,
    NotFound = 9,
    Utf8Error = 10,
    InternalError = 11,
}

fn status_of(e: &sqslab::Error) -> SqsStatus {
    use sqslab::Error::*;
    match e {
        WidthMismatch { .. } | DomainMismatch(_) | OutOfDomain(_) => SqsStatus::DomainError,
        EnumerationCap { .. } => SqsStatus::ResourceLimit,
        InvalidArgument(_) | Precondition(_) | Config(_) => SqsStatus::InvalidArgument,
        BudgetExhausted { .. } | ToleranceTooSmall { .. } => SqsStatus::BudgetViolation,
        AdversaryExhausted | EmptyPositiveSet => SqsStatus::SessionExhausted,
        Protocol(_) | NoDictatorFound { .. } | Degenerate(_) => SqsStatus::ProtocolError,
        Io(_) | Csv(_) | Json(_) => SqsStatus::InternalError,
    }
}

/// Opaque predicate handle.
pub struct SqsPredicate {
    inner: Predicate,
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, SqsStatus> {
    if ptr.is_null() {
        return Err(SqsStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| SqsStatus::Utf8Error)
}

fn guard(body: impl FnOnce() -> SqsStatus) -> SqsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => SqsStatus::InternalError,
    }
}

fn string_out(out: *mut *mut c_char, text: String) -> SqsStatus {
    let Ok(cstring) = CString::new(text) else {
        return SqsStatus::InternalError;
    };
    unsafe { *out = cstring.into_raw() };
    SqsStatus::Ok
}

/// Builds a predicate from its JSON descriptor, e.g.
/// `{"kind":"neg_parity","n":8,"secret_hex":"a5"}`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sqslab_predicate_from_json(
    json: *const c_char,
    out: *mut *mut SqsPredicate,
) -> SqsStatus {
    guard(|| {
        if out.is_null() {
            return SqsStatus::NullPointer;
        }
        let json = match unsafe { str_arg(json) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let spec: PredicateSpec = match serde_json::from_str(json) {
            Ok(s) => s,
            Err(_) => return SqsStatus::InvalidArgument,
        };
        match spec.build() {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(SqsPredicate { inner })) };
                SqsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a predicate handle. Null is ignored.
///
/// # Safety
/// `pred` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sqslab_predicate_free(pred: *mut SqsPredicate) {
    if !pred.is_null() {
        drop(unsafe { Box::from_raw(pred) });
    }
}

/// Evaluates a predicate over a binary domain at the packed point `x`
/// (entry 0 is the most significant bit). Writes 0 or 1.
///
/// # Safety
/// `pred` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sqslab_predicate_eval_bits(
    pred: *const SqsPredicate,
    x: u64,
    out: *mut i32,
) -> SqsStatus {
    guard(|| {
        if pred.is_null() || out.is_null() {
            return SqsStatus::NullPointer;
        }
        let pred = unsafe { &*pred };
        let n = pred.inner.domain().n();
        if x >= 1u64 << n {
            return SqsStatus::DomainError;
        }
        let point = Point::Bits(BitVector::from_index(n, x));
        match pred.inner.eval(&point) {
            Ok(v) => {
                unsafe { *out = v as i32 };
                SqsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Evaluates a predicate over a punctured Z_p domain at the given entries.
///
/// # Safety
/// `entries` must point to `len` readable values; `pred` and `out` must be
/// valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sqslab_predicate_eval_zp(
    pred: *const SqsPredicate,
    entries: *const u32,
    len: usize,
    out: *mut i32,
) -> SqsStatus {
    guard(|| {
        if pred.is_null() || entries.is_null() || out.is_null() {
            return SqsStatus::NullPointer;
        }
        let pred = unsafe { &*pred };
        let Domain::PuncturedZp { p, .. } = pred.inner.domain() else {
            return SqsStatus::DomainError;
        };
        let entries = unsafe { std::slice::from_raw_parts(entries, len) };
        let vector = match ZpVector::new(p, entries.to_vec()) {
            Ok(v) => v,
            Err(e) => return status_of(&e),
        };
        match pred.inner.eval(&Point::Zp(vector)) {
            Ok(v) => {
                unsafe { *out = v as i32 };
                SqsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Writes the fraction of the domain the predicate maps to 1.
///
/// # Safety
/// `pred` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sqslab_predicate_density(
    pred: *const SqsPredicate,
    out: *mut f64,
) -> SqsStatus {
    guard(|| {
        if pred.is_null() || out.is_null() {
            return SqsStatus::NullPointer;
        }
        let pred = unsafe { &*pred };
        match pred.inner.density(sqslab::domain::DEFAULT_DOMAIN_CAP) {
            Ok(d) => {
                unsafe { *out = d };
                SqsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Walsh–Hadamard coefficients of a length-2^n table of values, written to
/// `coefficients` (same length).
///
/// # Safety
/// `values` and `coefficients` must point to `len` readable/writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sqslab_wht(
    values: *const f64,
    coefficients: *mut f64,
    len: usize,
) -> SqsStatus {
    guard(|| {
        if values.is_null() || coefficients.is_null() {
            return SqsStatus::NullPointer;
        }
        if len == 0 || len & (len - 1) != 0 {
            return SqsStatus::InvalidArgument;
        }
        let n = len.trailing_zeros() as usize;
        let domain = match Domain::full_cube(n) {
            Ok(d) => d,
            Err(e) => return status_of(&e),
        };
        let values = unsafe { std::slice::from_raw_parts(values, len) };
        let table = match TruthTable::from_values(domain, values.to_vec()) {
            Ok(t) => t,
            Err(e) => return status_of(&e),
        };
        match wht(&table) {
            Ok(spectrum) => {
                let out = unsafe { std::slice::from_raw_parts_mut(coefficients, len) };
                out.copy_from_slice(spectrum.coefficients());
                SqsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Least `r > 0` with `a^r = 1 (mod modulus)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sqslab_order_of(a: u64, modulus: u64, out: *mut u64) -> SqsStatus {
    guard(|| {
        if out.is_null() {
            return SqsStatus::NullPointer;
        }
        match quantum::order_of(a, modulus) {
            Ok(r) => {
                unsafe { *out = r };
                SqsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Order candidate recovered from one measurement `y` of a register of size
/// `q`. Returns `NotFound` when the sample carries no usable information.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sqslab_continued_fraction_order(
    y: u64,
    q: u64,
    modulus: u64,
    a: u64,
    out: *mut u64,
) -> SqsStatus {
    guard(|| {
        if out.is_null() {
            return SqsStatus::NullPointer;
        }
        if q == 0 || y >= q {
            return SqsStatus::InvalidArgument;
        }
        match quantum::continued_fraction_order(y, q, modulus, a) {
            Some(r) => {
                unsafe { *out = r };
                SqsStatus::Ok
            }
            None => SqsStatus::NotFound,
        }
    })
}

/// Runs a batch experiment from its JSON config and returns the summary as a
/// JSON string (release with [`sqslab_string_free`]). The CSV report is
/// returned too when `out_csv` is non-null.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string; `out_summary` must be
/// a valid pointer; `out_csv` may be null.
#[no_mangle]
pub unsafe extern "C" fn sqslab_run_experiment_json(
    config_json: *const c_char,
    out_summary: *mut *mut c_char,
    out_csv: *mut *mut c_char,
) -> SqsStatus {
    guard(|| {
        if out_summary.is_null() {
            return SqsStatus::NullPointer;
        }
        let json = match unsafe { str_arg(config_json) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let config = match ExperimentConfig::from_json(json) {
            Ok(c) => c,
            Err(e) => return status_of(&e),
        };
        let output = match run_experiment(&config) {
            Ok(o) => o,
            Err(e) => return status_of(&e),
        };
        let summary = match output.summary_json() {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        if !out_csv.is_null() {
            let csv = match output.csv() {
                Ok(c) => c,
                Err(e) => return status_of(&e),
            };
            let status = string_out(out_csv, csv);
            if status != SqsStatus::Ok {
                return status;
            }
        }
        string_out(out_summary, summary)
    })
}

/// Runs a named verification suite; the JSON-lines report is written to
/// `out_report`. Returns `CheckFailed` when any check fails.
///
/// # Safety
/// `selector` must be a valid NUL-terminated string and `out_report` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn sqslab_verify(
    selector: *const c_char,
    n: u64,
    trials: u64,
    out_report: *mut *mut c_char,
) -> SqsStatus {
    guard(|| {
        if out_report.is_null() {
            return SqsStatus::NullPointer;
        }
        let selector = match unsafe { str_arg(selector) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let scale = VerifyScale {
            n: (n > 0).then_some(n as usize),
            trials: (trials > 0).then_some(trials),
            ..Default::default()
        };
        match verify_lemmas(selector, &scale) {
            Ok(report) => {
                let pass = report.all_pass();
                let status = string_out(out_report, report.to_json_lines());
                if status != SqsStatus::Ok {
                    status
                } else if pass {
                    SqsStatus::Ok
                } else {
                    SqsStatus::CheckFailed
                }
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sqslab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn sqslab_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

// Keep a typed null around so cbindgen emits the opaque declaration even if
// no exported signature mentions it by value.
#[allow(dead_code)]
fn _opaque_witness() -> *const SqsPredicate {
    ptr::null()
}
