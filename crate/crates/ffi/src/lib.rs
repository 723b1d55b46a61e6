//! C ABI over `serre-zeros`.
//!
//! Every fallible function returns an [`SzStatus`]; on failure the message is
//! available from [`sz_last_error`] on the calling thread. Strings handed out
//! by the library must be released with [`sz_string_free`], forms with
//! [`sz_form_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serre_zeros::pipeline::{analyze, certify, series_report, theorem_check, to_json_string};
use serre_zeros::serre::serre_iterate;
use serre_zeros::{parse_form_spec, Error, Level, ModularForm, RunConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    /// The input lies outside the hypotheses of the zero-location theorem.
    HypothesisFailed = 5,
    /// A truncated expansion was too short for the requested accuracy.
    Numerical = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque handle to a modular form.
pub struct SzForm {
    form: ModularForm,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SzStatus {
    match e {
        Error::Parse { .. } | Error::WeightMismatch { .. } | Error::UnknownGenerator { .. } => SzStatus::Parse,
        Error::HypothesisFailed(_) => SzStatus::HypothesisFailed,
        Error::InsufficientTruncation { .. } | Error::TruncationShortfall { .. } => SzStatus::Numerical,
        Error::Io(_) | Error::Json(_) => SzStatus::Internal,
        _ => SzStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SzStatus, String)>) -> SzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SzStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside serre-zeros".into());
            SzStatus::Panic
        }
    }
}

fn lib(e: Error) -> (SzStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SzStatus, String) {
    (SzStatus::NullPointer, format!("{what} is null"))
}

unsafe fn form_ref<'a>(p: *const SzForm) -> Result<&'a SzForm, (SzStatus, String)> {
    p.as_ref().ok_or_else(|| null("form"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (SzStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|_| (SzStatus::Internal, "string contains a nul byte".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_form(out: *mut *mut SzForm, form: ModularForm) -> Result<(), (SzStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(SzForm { form }));
    Ok(())
}

fn default_config(truncation: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    if truncation > 0 {
        cfg.truncation = truncation;
    }
    cfg
}

/// Last error message on this thread, or null. Valid until the next call
/// into the library from the same thread.
#[no_mangle]
pub extern "C" fn sz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a form expression such as `"E4^3 - E6^2"` at `level` with
/// `truncation` terms (0 selects the default).
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_form_parse(text: *const c_char, level: u32, truncation: usize, out: *mut *mut SzForm) -> SzStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (SzStatus::InvalidUtf8, "text is not valid UTF-8".to_string()))?;
        let cfg = default_config(truncation);
        cfg.validate().map_err(lib)?;
        let level = Level::new(level).map_err(lib)?;
        let form = parse_form_spec(text, level, &cfg).map_err(lib)?;
        write_form(out, form)
    })
}

/// # Safety
/// `form` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sz_form_free(form: *mut SzForm) {
    if !form.is_null() {
        drop(Box::from_raw(form));
    }
}

/// `n`-th iterated Serre derivative as a new form.
///
/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_form_serre(form: *const SzForm, n: u32, out: *mut *mut SzForm) -> SzStatus {
    guard(|| {
        let f = form_ref(form)?;
        let d = serre_iterate(&f.form, n).map_err(lib)?;
        write_form(out, d)
    })
}

/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_form_weight(form: *const SzForm, out: *mut i64) -> SzStatus {
    guard(|| {
        let f = form_ref(form)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = f.form.weight();
        Ok(())
    })
}

/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_form_level(form: *const SzForm, out: *mut u32) -> SzStatus {
    guard(|| {
        let f = form_ref(form)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = f.form.level().get();
        Ok(())
    })
}

/// Exponent of the first stored coefficient.
///
/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_form_valuation(form: *const SzForm, out: *mut i64) -> SzStatus {
    guard(|| {
        let f = form_ref(form)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = f.form.series().valuation();
        Ok(())
    })
}

/// Coefficient of `q^n` as a decimal string (`"p/q"` for exact forms).
///
/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_form_coefficient(form: *const SzForm, n: i64, out: *mut *mut c_char) -> SzStatus {
    guard(|| {
        let f = form_ref(form)?;
        let s = f
            .form
            .series()
            .coeff_string(n)
            .ok_or_else(|| (SzStatus::InvalidArgument, format!("q^{n} is beyond the truncation")))?;
        write_string(out, s)
    })
}

/// The q-expansion as schema-tagged JSON.
///
/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_form_series_json(form: *const SzForm, out: *mut *mut c_char) -> SzStatus {
    guard(|| {
        let f = form_ref(form)?;
        let s = to_json_string(&series_report(&f.form)).map_err(lib)?;
        write_string(out, s)
    })
}

/// Scans every boundary arc and audits the zero count; returns the report as
/// JSON. `grid` 0 and `refine_tol` <= 0 select the defaults.
///
/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_scan_zeros_json(form: *const SzForm, grid: usize, refine_tol: f64, out: *mut *mut c_char) -> SzStatus {
    guard(|| {
        let f = form_ref(form)?;
        let mut cfg = RunConfig::default();
        if grid > 0 {
            cfg.grid = grid;
        }
        if refine_tol > 0.0 {
            cfg.refine_tol = refine_tol;
        }
        cfg.validate().map_err(lib)?;
        let a = analyze(&f.form, &cfg).map_err(lib)?;
        write_string(out, to_json_string(&a).map_err(lib)?)
    })
}

/// Hypothesis check plus audits of `iterations` Serre derivatives as JSON.
/// A form outside the hypotheses still yields a report (verdict
/// `hypothesis-failed`) and status `HypothesisFailed`.
///
/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_audit_json(form: *const SzForm, iterations: u32, out: *mut *mut c_char) -> SzStatus {
    let mut hypothesis_failed = false;
    let status = guard(|| {
        let f = form_ref(form)?;
        let t = theorem_check(&f.form, iterations, &RunConfig::default()).map_err(lib)?;
        hypothesis_failed = t.hypothesis.reason.is_some();
        write_string(out, to_json_string(&t).map_err(lib)?)
    });
    if status == SzStatus::Ok && hypothesis_failed {
        set_error("the form does not satisfy the theorem's hypotheses".into());
        return SzStatus::HypothesisFailed;
    }
    status
}

/// Exact j-polynomial certificate (level 1, exact forms) as JSON. Refusals
/// are reported in the JSON with status `HypothesisFailed`.
///
/// # Safety
/// `form` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_jpoly_json(form: *const SzForm, out: *mut *mut c_char) -> SzStatus {
    let mut refused = None;
    let status = guard(|| {
        let f = form_ref(form)?;
        let c = certify(&f.form).map_err(lib)?;
        refused = c.refusal.clone();
        write_string(out, to_json_string(&c).map_err(lib)?)
    });
    match refused {
        Some(reason) if status == SzStatus::Ok => {
            set_error(reason);
            SzStatus::HypothesisFailed
        }
        _ => status,
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
