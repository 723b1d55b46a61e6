use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use serre_zeros_ffi::*;

fn parse(text: &str, level: u32, n: usize) -> (SzStatus, *mut SzForm) {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { sz_form_parse(c.as_ptr(), level, n, &mut out) };
    (st, out)
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { sz_string_free(s) };
    out
}

fn last_error() -> String {
    let p = sz_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn parse_getters_and_derivative() {
    let (st, f) = parse("E4^3 - E6^2", 1, 32);
    assert_eq!(st, SzStatus::Ok);
    let mut w = 0i64;
    let mut v = 0i64;
    let mut l = 0u32;
    unsafe {
        assert_eq!(sz_form_weight(f, &mut w), SzStatus::Ok);
        assert_eq!(sz_form_valuation(f, &mut v), SzStatus::Ok);
        assert_eq!(sz_form_level(f, &mut l), SzStatus::Ok);
    }
    assert_eq!((w, v, l), (12, 1, 1));
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sz_form_coefficient(f, 2, &mut s) }, SzStatus::Ok);
    assert_eq!(take(s), "-41472"); // 1728 * tau(2)

    let mut d = ptr::null_mut();
    assert_eq!(unsafe { sz_form_serre(f, 1, &mut d) }, SzStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { sz_form_series_json(d, &mut json) }, SzStatus::Ok);
    let json = take(json);
    assert!(json.contains("\"coeffs\"") && json.contains("\"weight\": 14"), "{json}");
    unsafe {
        sz_form_free(d);
        sz_form_free(f);
    }
}

#[test]
fn errors_set_status_and_message() {
    let (st, f) = parse("E4 + E6", 1, 16);
    assert_eq!(st, SzStatus::Parse);
    assert!(f.is_null());
    assert!(last_error().contains("weight mismatch"));

    let (st, _) = parse("E4 +", 1, 16);
    assert_eq!(st, SzStatus::Parse);
    assert!(last_error().contains("position 4"));

    let (st, _) = parse("E4", 4, 16);
    assert_eq!(st, SzStatus::InvalidArgument);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sz_form_parse(ptr::null(), 1, 16, &mut out) }, SzStatus::NullPointer);
    let mut w = 0;
    assert_eq!(unsafe { sz_form_weight(ptr::null(), &mut w) }, SzStatus::NullPointer);

    let (st, f) = parse("E4", 1, 16);
    assert_eq!(st, SzStatus::Ok);
    assert!(sz_last_error().is_null());
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sz_form_coefficient(f, 100, &mut s) }, SzStatus::InvalidArgument);
    unsafe {
        sz_form_free(f);
        sz_form_free(ptr::null_mut());
        sz_string_free(ptr::null_mut());
    }
}

#[test]
fn reports_as_json() {
    let (_, f) = parse("E12", 1, 200);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sz_scan_zeros_json(f, 256, 0.0, &mut s) }, SzStatus::Ok);
    let scan = take(s);
    assert!(scan.contains("\"schema\": \"serre-zeros/1\""));
    assert!(scan.contains("\"residual\": \"0\""), "{scan}");

    assert_eq!(unsafe { sz_jpoly_json(f, &mut s) }, SzStatus::Ok);
    let cert = take(s);
    assert!(cert.contains("\"certified\": true"));
    unsafe { sz_form_free(f) };

    let (_, g) = parse("Delta", 1, 64);
    assert_eq!(unsafe { sz_jpoly_json(g, &mut s) }, SzStatus::HypothesisFailed);
    assert!(take(s).contains("\"refusal\""));
    assert!(last_error().contains("no zeros"));
    unsafe { sz_form_free(g) };

    let (_, h) = parse("E4*(j - 2000)", 1, 200);
    assert_eq!(unsafe { sz_audit_json(h, 1, &mut s) }, SzStatus::HypothesisFailed);
    assert!(take(s).contains("\"verdict\": \"hypothesis-failed\""));
    unsafe { sz_form_free(h) };
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = include.join("serre_zeros.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["sz_form_parse", "sz_form_free", "sz_string_free", "sz_last_error", "typedef struct SzForm SzForm"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"serre_zeros.h\"\n\
         int run(void) {\n\
           SzForm *f = NULL; char *s = NULL; int64_t w = 0;\n\
           if (sz_form_parse(\"E4\", 1, 0, &f) != SZ_STATUS_OK) return 1;\n\
           sz_form_weight(f, &w);\n\
           sz_jpoly_json(f, &s);\n\
           sz_string_free(s);\n\
           sz_form_free(f);\n\
           return (int)w;\n\
         }\n",
    )
    .unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg("-I")
            .arg(&include)
            .arg(&src)
            .status()
            .unwrap_or_else(|e| panic!("{compiler}: {e}"));
        assert!(status.success(), "{compiler} rejected the header");
    }
}
