//! C ABI over `qcat`: models behind opaque handles, status codes, a
//! thread-local last-error message, and JSON strings for structured results.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qcat::model::{Model, ModelSpec};
use qcat::poly::parse::parse_grat;
use qcat::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcatStatus {
    Ok = 0,
    NullPointer = 1,
    InputError = 2,
    NumericalError = 3,
    InvalidUtf8 = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque model handle.
pub struct QcatModel {
    inner: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: QcatStatus, msg: &str) -> QcatStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> QcatStatus {
    let status = if e.exit_code() == 3 { QcatStatus::NumericalError } else { QcatStatus::InputError };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> QcatStatus) -> QcatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == QcatStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(QcatStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, QcatStatus> {
    if p.is_null() {
        return Err(fail(QcatStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(QcatStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn put_json(out: *mut *mut c_char, v: &serde_json::Value) -> QcatStatus {
    match CString::new(v.to_string()) {
        Ok(c) => {
            *out = c.into_raw();
            QcatStatus::Ok
        }
        Err(_) => fail(QcatStatus::Panic, "json contained NUL"),
    }
}

/// Message of the last failed call on this thread (empty after success).
/// Valid until the next `qcat_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qcat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qcat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a model description (JSON) into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_model_from_json(json: *const c_char, out: *mut *mut QcatModel) -> QcatStatus {
    guard(|| {
        if out.is_null() {
            return fail(QcatStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let s = match str_arg(json) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match ModelSpec::from_json(s).and_then(|spec| Model::from_spec(&spec)) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(QcatModel { inner: m }));
                QcatStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `model` must come from `qcat_model_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qcat_model_free(model: *mut QcatModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Matrix dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qcat_model_dim(model: *const QcatModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// Binds parameter `name` to the expression `value` (`NULL` frees it).
///
/// # Safety
/// `model` must be a live handle; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn qcat_model_set_param(
    model: *mut QcatModel,
    name: *const c_char,
    value: *const c_char,
) -> QcatStatus {
    guard(|| {
        let Some(m) = model.as_mut() else { return fail(QcatStatus::NullPointer, "null model") };
        let name = match str_arg(name) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let value = if value.is_null() {
            None
        } else {
            match str_arg(value) {
                Ok(s) => Some(s.to_string()),
                Err(st) => return st,
            }
        };
        let mut spec = m.inner.spec.clone();
        match spec.params.get_mut(name) {
            Some(slot) => *slot = value,
            None => return fail(QcatStatus::InputError, &format!("unknown parameter `{name}`")),
        }
        match Model::from_spec(&spec) {
            Ok(new) => {
                m.inner = new;
                QcatStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Eigenvalues of a fully bound model, sorted by real part, into two
/// caller arrays of length `len >= dim`.
///
/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qcat_eigenvalues(model: *const QcatModel, re: *mut f64, im: *mut f64, len: usize) -> QcatStatus {
    guard(|| {
        let Some(m) = model.as_ref() else { return fail(QcatStatus::NullPointer, "null model") };
        if re.is_null() || im.is_null() {
            return fail(QcatStatus::NullPointer, "null output array");
        }
        if len < m.inner.dim() {
            return fail(QcatStatus::BufferTooSmall, &format!("need {} slots, got {len}", m.inner.dim()));
        }
        match qcat::spectra::eigenvalues(&m.inner) {
            Ok(r) => {
                for (k, z) in r.eigenvalues.iter().enumerate() {
                    *re.add(k) = z.re;
                    *im.add(k) = z.im;
                }
                QcatStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Secular polynomial as JSON, optionally shifted by the expression `shift`.
/// Free the result with `qcat_string_free`.
///
/// # Safety
/// `model` live; `shift` NUL-terminated or null; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_secular_json(
    model: *const QcatModel,
    shift: *const c_char,
    out: *mut *mut c_char,
) -> QcatStatus {
    guard(|| {
        let Some(m) = model.as_ref() else { return fail(QcatStatus::NullPointer, "null model") };
        if out.is_null() {
            return fail(QcatStatus::NullPointer, "null output pointer");
        }
        let mut p = qcat::secular::char_poly(&m.inner.rational_matrix());
        if !shift.is_null() {
            let s = match str_arg(shift) {
                Ok(s) => s,
                Err(st) => return st,
            };
            match parse_grat(s).and_then(|c| p.shift(&c)) {
                Ok(q) => p = q,
                Err(e) => return from_error(e),
            }
        }
        put_json(out, &p.monic().to_json())
    })
}

/// Maximal exceptional points of the free parameters as a JSON array.
///
/// # Safety
/// `model` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_mep_json(model: *const QcatModel, out: *mut *mut c_char) -> QcatStatus {
    guard(|| {
        let Some(m) = model.as_ref() else { return fail(QcatStatus::NullPointer, "null model") };
        if out.is_null() {
            return fail(QcatStatus::NullPointer, "null output pointer");
        }
        match qcat::mep::solve_mep(&m.inner) {
            Ok(s) => put_json(out, &serde_json::Value::Array(s.iter().map(|x| x.to_json()).collect())),
            Err(e) => from_error(e),
        }
    })
}

/// Spectral metric with weights `kappa` (`NULL` for all ones) as JSON.
///
/// # Safety
/// `model` live; `kappa` null or `len` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_metric_json(
    model: *const QcatModel,
    kappa: *const f64,
    len: usize,
    out: *mut *mut c_char,
) -> QcatStatus {
    guard(|| {
        let Some(m) = model.as_ref() else { return fail(QcatStatus::NullPointer, "null model") };
        if out.is_null() {
            return fail(QcatStatus::NullPointer, "null output pointer");
        }
        let h = match m.inner.float_matrix() {
            Ok(h) => h.to_dense(),
            Err(e) => return from_error(e),
        };
        let k: Vec<f64> = if kappa.is_null() { vec![1.0; h.nrows()] } else { std::slice::from_raw_parts(kappa, len).to_vec() };
        match qcat::metric::spectral_metric(&h, &k) {
            Ok(c) => put_json(out, &c.to_json()),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `s` must come from a `qcat_*_json` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qcat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn last() -> String {
        unsafe { CStr::from_ptr(qcat_last_error()).to_string_lossy().into_owned() }
    }

    #[test]
    fn round_trip() {
        unsafe {
            let mut m = ptr::null_mut();
            let j = cs(r#"{"family":"gpm","dim":3,"params":{"a":"1/2"}}"#);
            assert_eq!(qcat_model_from_json(j.as_ptr(), &mut m), QcatStatus::Ok);
            assert_eq!(qcat_model_dim(m), 3);
            let (mut re, mut im) = ([0.0; 3], [0.0; 3]);
            assert_eq!(qcat_eigenvalues(m, re.as_mut_ptr(), im.as_mut_ptr(), 3), QcatStatus::Ok);
            let r = (2.0f64 - 0.25).sqrt();
            for (x, w) in re.iter().zip([-r, 0.0, r]) {
                assert!((x - w).abs() < 1e-12);
            }
            assert_eq!(qcat_eigenvalues(m, re.as_mut_ptr(), im.as_mut_ptr(), 2), QcatStatus::BufferTooSmall);
            assert!(last().contains("need 3"));
            let mut s = ptr::null_mut();
            let two = cs("2");
            assert_eq!(qcat_secular_json(m, two.as_ptr(), &mut s), QcatStatus::Ok);
            let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
            assert_eq!(v["degree"], 3);
            qcat_string_free(s);
            qcat_model_free(m);
        }
    }

    #[test]
    fn errors_and_mep() {
        unsafe {
            let mut m = ptr::null_mut();
            let bad = cs(r#"{"family":"gpm""#);
            assert_eq!(qcat_model_from_json(bad.as_ptr(), &mut m), QcatStatus::InputError);
            assert!(m.is_null());
            assert!(!last().is_empty());
            assert_eq!(qcat_model_from_json(ptr::null(), &mut m), QcatStatus::NullPointer);

            let j = cs(r#"{"family":"aom","dim":4,"params":{"a":"4","b":"3"}}"#);
            assert_eq!(qcat_model_from_json(j.as_ptr(), &mut m), QcatStatus::Ok);
            let mut s = ptr::null_mut();
            // the fourfold collision: metric refused
            assert_eq!(qcat_metric_json(m, ptr::null(), 0, &mut s), QcatStatus::NumericalError);
            let (a, b) = (cs("a"), cs("b"));
            assert_eq!(qcat_model_set_param(m, a.as_ptr(), ptr::null()), QcatStatus::Ok);
            assert_eq!(qcat_model_set_param(m, b.as_ptr(), ptr::null()), QcatStatus::Ok);
            assert_eq!(qcat_mep_json(m, &mut s), QcatStatus::Ok);
            let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
            assert!(v.as_array().unwrap().iter().any(|x| x["exact"]["a"] == "4" && x["exact"]["b"] == "3"));
            qcat_string_free(s);
            let c = cs("c");
            assert_eq!(qcat_model_set_param(m, c.as_ptr(), ptr::null()), QcatStatus::InputError);
            qcat_model_free(m);
            qcat_model_free(ptr::null_mut());
        }
    }
}
