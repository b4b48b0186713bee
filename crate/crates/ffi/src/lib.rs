//! C interface to the infconv toolkit.
//!
//! Scenes and verification reports are opaque handles created and freed by
//! this library. Every fallible call returns an [`InfconvStatus`]; on failure
//! [`infconv_last_error`] describes the problem on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use infconv::infconv::{InfConvolution, DEFAULT_SLACK};
use infconv::scene::{parse_scene, Scene};
use infconv::subdiff::{frechet_test, holder_test, rhs_frechet, rhs_holder, MembershipResult, Verdict, S0_TOL};
use infconv::verifier::{run_suite, SuiteConfig, VerificationReport};
use infconv::{Covector, Error, ExtReal, Gauge, Vector};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfconvStatus {
    InfconvOk = 0,
    InfconvErrNullPointer = 1,
    InfconvErrInvalidInput = 2,
    InfconvErrDimension = 3,
    InfconvErrPrecondition = 4,
    InfconvErrDomainEmpty = 5,
    InfconvErrInternal = 6,
    InfconvErrPanic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfconvVerdict {
    InfconvMember = 0,
    InfconvNonMember = 1,
    InfconvUndetermined = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfconvKind {
    /// Parameter is ε ≥ 0.
    InfconvFrechet = 0,
    /// Parameter is s > 0.
    InfconvHolder = 1,
}

/// A parsed scene together with its gauge and infimal convolution.
pub struct InfconvScene {
    scene: Scene,
    gauge: Gauge,
    t: InfConvolution,
}

/// Records of a verification run.
pub struct InfconvReport {
    report: VerificationReport,
    jsonl: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> InfconvStatus {
    match e {
        Error::DimensionMismatch { .. } => InfconvStatus::InfconvErrDimension,
        Error::InvalidInput(_) => InfconvStatus::InfconvErrInvalidInput,
        Error::Precondition(_) => InfconvStatus::InfconvErrPrecondition,
        Error::DomainEmpty(_) => InfconvStatus::InfconvErrDomainEmpty,
        Error::Internal(_) => InfconvStatus::InfconvErrInternal,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> InfconvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            InfconvStatus::InfconvOk
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            InfconvStatus::InfconvErrNullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            InfconvStatus::InfconvErrPanic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn coords(p: *const f64, n: usize, what: &'static str) -> Result<Vec<f64>, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n).to_vec())
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail::Lib(Error::InvalidInput(format!("{what} is not UTF-8: {e}"))))
}

fn point(scene: &InfconvScene, c: Vec<f64>) -> Result<Vector, Fail> {
    if c.len() != scene.scene.dimension {
        return Err(Error::DimensionMismatch { expected: scene.scene.dimension, found: c.len() }.into());
    }
    Ok(Vector::new(c)?)
}

fn ext(v: ExtReal) -> f64 {
    match v {
        ExtReal::Finite(x) => x,
        ExtReal::PlusInfinity => f64::INFINITY,
    }
}

fn verdict(r: &MembershipResult) -> InfconvVerdict {
    match r.verdict {
        Verdict::Member => InfconvVerdict::InfconvMember,
        Verdict::NonMember => InfconvVerdict::InfconvNonMember,
        Verdict::Undetermined => InfconvVerdict::InfconvUndetermined,
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn infconv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON scene. On success `*out` owns a handle to be released with
/// [`infconv_scene_free`].
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn infconv_scene_new(json: *const c_char, out: *mut *mut InfconvScene) -> InfconvStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        *slot = ptr::null_mut();
        let scene = parse_scene(text(json, "json")?)?;
        let gauge = scene.gauge()?;
        let t = scene.infconv()?;
        *slot = Box::into_raw(Box::new(InfconvScene { scene, gauge, t }));
        Ok(())
    })
}

/// # Safety
/// `scene` must be null or a handle from [`infconv_scene_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn infconv_scene_free(scene: *mut InfconvScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Dimension of the scene, or 0 for a null handle.
///
/// # Safety
/// `scene` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn infconv_scene_dimension(scene: *const InfconvScene) -> usize {
    scene.as_ref().map_or(0, |s| s.scene.dimension)
}

/// Gauge of the scene body at `x[0..n]`; `+∞` is reported as `INFINITY`.
///
/// # Safety
/// `scene` must be a live handle, `x` must point to `n` doubles and `value`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infconv_gauge(
    scene: *const InfconvScene,
    x: *const f64,
    n: usize,
    value: *mut f64,
) -> InfconvStatus {
    guard(|| {
        let s = deref(scene, "scene")?;
        let x = point(s, coords(x, n, "x")?)?;
        let v = ext(s.gauge.eval(&x)?);
        *out(value, "value")? = v;
        Ok(())
    })
}

/// Value of `T = φ □ f` at `x[0..n]`; `approximate` is set when the value
/// is a grid-search upper bound.
///
/// # Safety
/// As for [`infconv_gauge`]; `approximate` may be null.
#[no_mangle]
pub unsafe extern "C" fn infconv_value(
    scene: *const InfconvScene,
    x: *const f64,
    n: usize,
    value: *mut f64,
    approximate: *mut bool,
) -> InfconvStatus {
    guard(|| {
        let s = deref(scene, "scene")?;
        let x = point(s, coords(x, n, "x")?)?;
        let r = s.t.eval(&x, DEFAULT_SLACK)?;
        *out(value, "value")? = ext(r.value);
        if let Some(a) = approximate.as_mut() {
            *a = r.approximate;
        }
        Ok(())
    })
}

/// Whether `x[0..n]` lies in S₀, the set where T agrees with f.
///
/// # Safety
/// As for [`infconv_gauge`].
#[no_mangle]
pub unsafe extern "C" fn infconv_in_s0(
    scene: *const InfconvScene,
    x: *const f64,
    n: usize,
    inside: *mut bool,
) -> InfconvStatus {
    guard(|| {
        let s = deref(scene, "scene")?;
        let x = point(s, coords(x, n, "x")?)?;
        let r = s.t.is_in_s0(&x, S0_TOL)?;
        *out(inside, "inside")? = r;
        Ok(())
    })
}

/// Membership of `xstar` in the subdifferential of T at `x` (`lhs`) and in
/// the right-hand side set built from f and φ (`rhs`). `param` is ε for
/// Fréchet and s for Hölder. `x` must lie in S₀.
///
/// # Safety
/// `x` and `xstar` must point to `n` doubles; `lhs` and `rhs` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn infconv_subdiff(
    scene: *const InfconvScene,
    x: *const f64,
    xstar: *const f64,
    n: usize,
    kind: InfconvKind,
    param: f64,
    lhs: *mut InfconvVerdict,
    rhs: *mut InfconvVerdict,
) -> InfconvStatus {
    guard(|| {
        let s = deref(scene, "scene")?;
        let x = point(s, coords(x, n, "x")?)?;
        let y = Covector::new(coords(xstar, n, "xstar")?)?;
        let plan = s.scene.plan()?;
        let (l, r) = match kind {
            InfconvKind::InfconvFrechet => {
                (frechet_test(&s.t, &x, &y, param, &plan)?, rhs_frechet(&s.t, &x, &y, param, &plan)?)
            }
            InfconvKind::InfconvHolder => {
                if !(param > 0.0) {
                    return Err(Error::InvalidInput(format!("s must be positive, got {param}")).into());
                }
                let cap = plan.matched_sigma_cap(param);
                (holder_test(&s.t, &x, &y, param, &plan, cap)?, rhs_holder(&s.t, &x, &y, param, &plan, cap)?)
            }
        };
        let (lo, ro) = (out(lhs, "lhs")?, out(rhs, "rhs")?);
        *lo = verdict(&l);
        *ro = verdict(&r);
        Ok(())
    })
}

/// Runs the verification suite described by a JSON config; a null `config`
/// selects the bundled suite. The report handle is released with
/// [`infconv_report_free`].
///
/// # Safety
/// `config` must be null or a nul-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn infconv_verify(
    config: *const c_char,
    seed: u64,
    out: *mut *mut InfconvReport,
) -> InfconvStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        *slot = ptr::null_mut();
        let mut cfg = if config.is_null() { SuiteConfig::default() } else { SuiteConfig::from_json(text(config, "config")?)? };
        cfg.seed = seed;
        let report = run_suite(&cfg)?;
        let jsonl = CString::new(report.to_jsonl()).map_err(|e| Error::Internal(e.to_string()))?;
        *slot = Box::into_raw(Box::new(InfconvReport { report, jsonl }));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`infconv_verify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn infconv_report_free(report: *mut InfconvReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// True when no check failed. A null handle reports false.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn infconv_report_passed(report: *const InfconvReport) -> bool {
    report.as_ref().is_some_and(|r| r.report.passed())
}

/// Number of check records.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn infconv_report_len(report: *const InfconvReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.records.len())
}

/// The records as line-delimited JSON, owned by the report.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn infconv_report_jsonl(report: *const InfconvReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.jsonl.as_ptr())
}
