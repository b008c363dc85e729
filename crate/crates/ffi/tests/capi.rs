use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cavlab_ffi::*;

fn parse(spec: &str) -> *mut CavCurve {
    let s = CString::new(spec).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cav_curve_parse(s.as_ptr(), &mut out) }, CavStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = cav_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn curve_handle_round_trip() {
    let c = parse("kind=polynomial coeffs=0,0,1,1");
    let mut v = 0.0;
    unsafe {
        assert_eq!(cav_curve_eval(c, 0.5, 0, &mut v), CavStatus::Ok);
        assert!((v - 0.375).abs() < 1e-15);
        assert_eq!(cav_curve_eval(c, 0.5, 2, &mut v), CavStatus::Ok);
        assert!((v - 5.0).abs() < 1e-12);
        assert_eq!(cav_curve_omega(c, &mut v), CavStatus::Ok);
        assert_eq!(v, 2.0);
        cav_curve_free(c);
        cav_curve_free(ptr::null_mut());
    }
}

#[test]
fn flat_curve_reports_infinite_omega() {
    let c = parse("kind=flat_exp a=1");
    let mut v = 0.0;
    unsafe {
        assert_eq!(cav_curve_omega(c, &mut v), CavStatus::Ok);
        assert_eq!(v, f64::INFINITY);
        let mut r = std::mem::zeroed::<CavRegionVerdict>();
        assert_eq!(cav_region_classify(0.5, 0.5, v, &mut r), CavStatus::Ok);
        assert!(r.line_value.is_nan());
        cav_curve_free(c);
    }
}

#[test]
fn errors_set_status_and_message() {
    let s = CString::new("kind=power").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cav_curve_parse(s.as_ptr(), &mut out) }, CavStatus::Parse);
    assert!(out.is_null());
    assert!(last_error().contains("'d'"));

    let mut v = 0.0;
    assert_eq!(unsafe { cav_curve_eval(ptr::null(), 0.5, 0, &mut v) }, CavStatus::InvalidArgument);
    let c = parse("kind=power d=2");
    unsafe {
        assert_eq!(cav_curve_eval(c, 0.5, 0, ptr::null_mut()), CavStatus::InvalidArgument);
        assert_eq!(cav_curve_eval(c, 0.5, 99, &mut v), CavStatus::Unsupported);
        assert_eq!(cav_critical_point(c, 0, 1.0, 1.0, &mut v), CavStatus::NotAdmissible);
        let mut r = std::mem::zeroed::<CavRegionVerdict>();
        assert_eq!(cav_region_classify(0.5, 0.5, -1.0, &mut r), CavStatus::InvalidArgument);
        cav_curve_free(c);
    }
}

#[test]
fn region_and_prediction() {
    let mut r = unsafe { std::mem::zeroed::<CavRegionVerdict>() };
    unsafe {
        assert_eq!(cav_region_classify(0.5, 1.0 / 6.0, 2.0, &mut r), CavStatus::Ok);
    }
    // C lies on the open edge 1/q = 1/(3p)
    assert!(!r.in_trapezium && r.in_necessary && r.violated == 0);
    unsafe {
        assert_eq!(cav_region_classify(2.0 / 3.0, 1.0 / 3.0, 3.0, &mut r), CavStatus::Ok);
    }
    assert!((r.line_value + 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(r.violated, CAV_VIOLATES_I);

    let c = parse("kind=power d=3");
    let mut v = 0.0;
    unsafe {
        assert_eq!(cav_predicted_exponent(CavFamily::RectI, 2.0 / 3.0, 1.0 / 3.0, c, &mut v), CavStatus::Ok);
        assert!((v + 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(cav_predicted_exponent(CavFamily::AdjointIii, 2.0 / 3.0, 1.0 / 3.0, c, &mut v), CavStatus::Ok);
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        cav_curve_free(c);
    }
}

#[test]
fn fit_and_series() {
    let eps: Vec<f64> = (3..=8).map(|k| (-(k as f64)).exp2()).collect();
    let ratio: Vec<f64> = eps.iter().map(|e| 7.0 * e.powf(-1.0)).collect();
    let mut f = CavFit { slope: 0.0, intercept: 0.0, std_error: 0.0, consistent: false };
    unsafe {
        assert_eq!(cav_fit_exponent(eps.as_ptr(), ratio.as_ptr(), eps.len(), -1.0, 0.15, &mut f), CavStatus::Ok);
    }
    assert!((f.slope + 1.0).abs() < 1e-12 && (f.intercept - 7f64.ln()).abs() < 1e-12 && f.consistent);
    unsafe {
        assert_eq!(cav_fit_exponent(eps.as_ptr(), ratio.as_ptr(), 3, -1.0, 0.15, &mut f), CavStatus::InvalidArgument);
    }

    let c = parse("kind=power d=2");
    let (mut conv, mut v) = (false, 0.0);
    unsafe {
        assert_eq!(cav_series_lemma21(c, 0.5, 0.5, -60, &mut conv, &mut v), CavStatus::Ok);
        assert!(conv && (v - 2.0).abs() < 1e-12);
        // line value 1 + 3(0 - 1) < 0
        assert_eq!(cav_series_lemma21(c, 1.0, 0.0, -60, &mut conv, &mut v), CavStatus::Ok);
        assert!(!conv && v.is_nan());
        cav_curve_free(c);
    }
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cavlab.h")).unwrap();
    for name in [
        "cav_curve_parse",
        "cav_curve_free",
        "cav_region_classify",
        "cav_predicted_exponent",
        "cav_fit_exponent",
        "cav_series_lemma21",
        "cav_critical_point",
        "cav_last_error_message",
        "typedef struct CavCurve CavCurve;",
    ] {
        assert!(h.contains(name), "{name}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libcavlab_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let bin = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cavlab_smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap_or_else(|e| panic!("cannot run {cc}: {e}"));
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "c smoke ok");
}
