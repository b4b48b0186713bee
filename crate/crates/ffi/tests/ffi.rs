use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use infconv_ffi::*;

const SIMPLEX: &str = r#"{"dimension": 2,
  "F": {"kind": "vpolytope", "vertices": [[1,0],[0,1],[-1,-1]]},
  "Omega": {"kind": "points", "points": [[3,0],[0,4]]}}"#;

const HALFPLANE: &str = r#"{"dimension": 2,
  "F": {"kind": "ball", "p": 2, "radius": 1},
  "Omega": {"kind": "halfspaces", "rows": [{"normal": [0,1], "offset": 0}]}}"#;

fn scene(json: &str) -> *mut InfconvScene {
    let text = CString::new(json).unwrap();
    let mut handle = ptr::null_mut();
    let status = unsafe { infconv_scene_new(text.as_ptr(), &mut handle) };
    assert_eq!(status, InfconvStatus::InfconvOk);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    let p = infconv_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn gauge_and_value() {
    let s = scene(SIMPLEX);
    unsafe {
        assert_eq!(infconv_scene_dimension(s), 2);
        let mut v = 0.0;
        assert_eq!(infconv_gauge(s, [2.0, 2.0].as_ptr(), 2, &mut v), InfconvStatus::InfconvOk);
        assert!((v - 4.0).abs() < 1e-9);
        let mut approx = true;
        assert_eq!(infconv_value(s, [3.0, 0.0].as_ptr(), 2, &mut v, &mut approx), InfconvStatus::InfconvOk);
        assert_eq!(v, 0.0);
        assert!(!approx);
        let mut inside = false;
        assert_eq!(infconv_in_s0(s, [0.0, 4.0].as_ptr(), 2, &mut inside), InfconvStatus::InfconvOk);
        assert!(inside);
        infconv_scene_free(s);
    }
}

#[test]
fn infinite_gauge_is_reported_as_infinity() {
    let s = scene(r#"{"dimension": 1, "F": {"kind": "vpolytope", "vertices": [[1],[2]]},
        "Omega": {"kind": "points", "points": [[0]]}}"#);
    let mut v = 0.0;
    assert_eq!(unsafe { infconv_gauge(s, [-1.0].as_ptr(), 1, &mut v) }, InfconvStatus::InfconvOk);
    assert_eq!(v, f64::INFINITY);
    unsafe { infconv_scene_free(s) };
}

#[test]
fn subdifferential_verdicts() {
    let s = scene(HALFPLANE);
    let (mut lhs, mut rhs) = (InfconvVerdict::InfconvUndetermined, InfconvVerdict::InfconvUndetermined);
    let x = [0.0, 0.0];
    unsafe {
        let st = infconv_subdiff(s, x.as_ptr(), [0.0, 2.0].as_ptr(), 2, InfconvKind::InfconvFrechet, 0.0, &mut lhs, &mut rhs);
        assert_eq!(st, InfconvStatus::InfconvOk);
        assert_eq!((lhs, rhs), (InfconvVerdict::InfconvNonMember, InfconvVerdict::InfconvNonMember));
        let st = infconv_subdiff(s, x.as_ptr(), [0.0, 0.5].as_ptr(), 2, InfconvKind::InfconvHolder, 1.0, &mut lhs, &mut rhs);
        assert_eq!(st, InfconvStatus::InfconvOk);
        assert_eq!((lhs, rhs), (InfconvVerdict::InfconvMember, InfconvVerdict::InfconvMember));
        let st = infconv_subdiff(s, [0.0, 1.0].as_ptr(), [0.0, 0.5].as_ptr(), 2, InfconvKind::InfconvFrechet, 0.0, &mut lhs, &mut rhs);
        assert_eq!(st, InfconvStatus::InfconvErrPrecondition);
        assert!(last_error().contains("S0"));
        let st = infconv_subdiff(s, x.as_ptr(), [0.0, 0.5].as_ptr(), 2, InfconvKind::InfconvHolder, 0.0, &mut lhs, &mut rhs);
        assert_eq!(st, InfconvStatus::InfconvErrInvalidInput);
        infconv_scene_free(s);
    }
}

#[test]
fn errors_set_status_and_message() {
    let bad = CString::new(r#"{"dimension": 2, "F": {"kind": "ball", "p": 2, "radius": 1, "r": 1}, "Omega": {"kind": "points", "points": [[0,0]]}}"#).unwrap();
    let mut handle = ptr::null_mut();
    unsafe {
        assert_eq!(infconv_scene_new(bad.as_ptr(), &mut handle), InfconvStatus::InfconvErrInvalidInput);
        assert!(handle.is_null());
        assert!(last_error().contains("`F`"));
        assert_eq!(infconv_scene_new(ptr::null(), &mut handle), InfconvStatus::InfconvErrNullPointer);
        assert!(last_error().contains("json"));

        let s = scene(SIMPLEX);
        let mut v = 0.0;
        assert_eq!(infconv_gauge(s, [1.0].as_ptr(), 1, &mut v), InfconvStatus::InfconvErrDimension);
        assert_eq!(infconv_gauge(s, [1.0, f64::NAN].as_ptr(), 2, &mut v), InfconvStatus::InfconvErrInvalidInput);
        assert_eq!(infconv_gauge(ptr::null(), [1.0, 1.0].as_ptr(), 2, &mut v), InfconvStatus::InfconvErrNullPointer);
        assert_eq!(infconv_gauge(s, [1.0, 1.0].as_ptr(), 2, ptr::null_mut()), InfconvStatus::InfconvErrNullPointer);
        // A successful call clears the message.
        assert_eq!(infconv_gauge(s, [1.0, 1.0].as_ptr(), 2, &mut v), InfconvStatus::InfconvOk);
        assert!(infconv_last_error().is_null());
        infconv_scene_free(s);
        infconv_scene_free(ptr::null_mut());
        assert_eq!(infconv_scene_dimension(ptr::null()), 0);
    }
}

#[test]
fn verify_small_config() {
    let cfg = CString::new(r#"{"fixtures": ["ray_interval_1d"], "gauge_trials": 200, "covectors": 50}"#).unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(infconv_verify(cfg.as_ptr(), 7, &mut report), InfconvStatus::InfconvOk);
        assert!(infconv_report_passed(report));
        let n = infconv_report_len(report);
        assert!(n >= 5);
        let text = CStr::from_ptr(infconv_report_jsonl(report)).to_str().unwrap();
        assert_eq!(text.lines().count(), n);
        assert!(text.lines().all(|l| l.starts_with("{\"check_id\":")));
        infconv_report_free(report);

        let empty = CString::new(r#"{"fixtures": []}"#).unwrap();
        assert_eq!(infconv_verify(empty.as_ptr(), 7, &mut report), InfconvStatus::InfconvErrInvalidInput);
        assert!(report.is_null());
        assert!(!infconv_report_passed(ptr::null()));
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/infconv.h");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\nint main(void) {{ InfconvScene *s = 0; double v; \
             return infconv_gauge(s, 0, 0, &v) == INFCONV_OK; }}\n"
        ),
    )
    .unwrap();
    let out = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
