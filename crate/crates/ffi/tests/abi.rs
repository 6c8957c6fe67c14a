use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use padyn_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn parse(s: &str) -> *mut PdynPAdic {
    let mut x = ptr::null_mut();
    assert_eq!(pdyn_padic_parse(cstr(s).as_ptr(), &mut x), PdynStatus::Ok);
    x
}

unsafe fn format(x: *const PdynPAdic) -> String {
    let mut s = ptr::null_mut();
    assert_eq!(pdyn_padic_format(x, &mut s), PdynStatus::Ok);
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    pdyn_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(pdyn_last_error_message()).to_string_lossy().into_owned()
}

#[test]
fn arithmetic_round_trip() {
    unsafe {
        let a = parse("p:3;u:0;d:2,1,0,1");
        let b = parse("p:3;u:1;d:1,2");
        let mut sum = ptr::null_mut();
        assert_eq!(pdyn_padic_add(a, b, &mut sum), PdynStatus::Ok);
        // 2 + 3 + 27 plus 3 + 18 = 53 = 2 + 2·3 + 2·9 + 1·27, known mod 3^3
        assert_eq!(format(sum), "p:3;u:0;d:2,2,2");
        let mut diff = ptr::null_mut();
        assert_eq!(pdyn_padic_sub(sum, b, &mut diff), PdynStatus::Ok);
        assert_eq!(format(diff), "p:3;u:0;d:2,1,0");
        let mut prod = ptr::null_mut();
        assert_eq!(pdyn_padic_mul(b, b, &mut prod), PdynStatus::Ok);
        let (mut k, mut zero) = (0, true);
        assert_eq!(pdyn_padic_norm_exponent(prod, &mut k, &mut zero), PdynStatus::Ok);
        assert_eq!((k, zero), (2, false));
        for x in [a, b, sum, diff, prod] {
            pdyn_padic_free(x);
        }
    }
}

#[test]
fn map_eval_through_handles() {
    unsafe {
        let mut ctx = ptr::null_mut();
        assert_eq!(pdyn_context_new_zp(2, 6, &mut ctx), PdynStatus::Ok);
        let mut map = ptr::null_mut();
        assert_eq!(pdyn_map_new(ctx, cstr("shift_zp").as_ptr(), &mut map), PdynStatus::Ok);
        let mut x = ptr::null_mut();
        assert_eq!(pdyn_padic_from_i64(2, 13, &mut x), PdynStatus::Ok);
        let mut y = ptr::null_mut();
        assert_eq!(pdyn_map_eval(map, x, &mut y), PdynStatus::Ok);
        let mut six = ptr::null_mut();
        assert_eq!(pdyn_padic_from_i64(2, 6, &mut six), PdynStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(pdyn_padic_sub(y, six, &mut d), PdynStatus::Ok);
        let (mut k, mut zero) = (0, false);
        assert_eq!(pdyn_padic_norm_exponent(d, &mut k, &mut zero), PdynStatus::Ok);
        assert!(zero);
        let z = parse("p:3;u:0;d:2,1,0,1");
        let mut ctx3 = ptr::null_mut();
        assert_eq!(pdyn_context_new_zp(3, 8, &mut ctx3), PdynStatus::Ok);
        let mut shift3 = ptr::null_mut();
        assert_eq!(pdyn_map_new(ctx3, cstr("shift_zp").as_ptr(), &mut shift3), PdynStatus::Ok);
        let mut sz = ptr::null_mut();
        assert_eq!(pdyn_map_eval(shift3, z, &mut sz), PdynStatus::Ok);
        assert_eq!(format(sz), "p:3;u:0;d:1,0,1");
        pdyn_map_free(shift3);
        pdyn_context_free(ctx3);
        for v in [x, y, six, d, z, sz] {
            pdyn_padic_free(v);
        }
        pdyn_map_free(map);
        pdyn_context_free(ctx);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut x = ptr::null_mut();
        assert_eq!(pdyn_padic_parse(cstr("p:4;u:0;d:1").as_ptr(), &mut x), PdynStatus::Parse);
        assert!(last_error().contains("not prime"));
        assert_eq!(pdyn_padic_parse(ptr::null(), &mut x), PdynStatus::NullPointer);
        assert!(x.is_null());

        let a = parse("p:2;u:0;d:1");
        let b = parse("p:3;u:0;d:1");
        let mut out = ptr::null_mut();
        assert_eq!(pdyn_padic_add(a, b, &mut out), PdynStatus::PrimeMismatch);
        assert!(out.is_null());

        let mut ctx = ptr::null_mut();
        assert_eq!(pdyn_context_new_zp(6, 4, &mut ctx), PdynStatus::BadParams);
        assert_eq!(pdyn_context_new_zp(3, 4, &mut ctx), PdynStatus::Ok);
        let mut map = ptr::null_mut();
        assert_eq!(pdyn_map_new(ctx, cstr("affine(v=3").as_ptr(), &mut map), PdynStatus::Parse);
        assert!(last_error().contains("byte"));
        assert_eq!(pdyn_map_new(ctx, cstr("no_such_map").as_ptr(), &mut map), PdynStatus::Parse);
        pdyn_context_free(ctx);
        pdyn_padic_free(a);
        pdyn_padic_free(b);
        pdyn_padic_free(ptr::null_mut());
        pdyn_string_free(ptr::null_mut());
    }
}

#[test]
fn run_json_reports_and_flags_failures() {
    unsafe {
        let ok = cstr(r#"{"command": "analyze", "p": 2, "n": 5, "map": "shift_zp", "checks": "lip,locally-scaling:1"}"#);
        let mut report = ptr::null_mut();
        assert_eq!(pdyn_run_json(ok.as_ptr(), &mut report), PdynStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
        assert_eq!(v["schema"], "padyn-report/1");
        assert_eq!(v["passed"], true);
        pdyn_string_free(report);

        let bad = cstr(r#"{"command": "analyze", "p": 2, "n": 5, "map": "shift_zp", "checks": "locally-scaling:1:2"}"#);
        let mut report = ptr::null_mut();
        assert_eq!(pdyn_run_json(bad.as_ptr(), &mut report), PdynStatus::InvariantFailed);
        assert!(!report.is_null());
        pdyn_string_free(report);

        let mut report = ptr::null_mut();
        assert_eq!(pdyn_run_json(cstr(r#"{"command": "nope"}"#).as_ptr(), &mut report), PdynStatus::Parse);
        assert!(report.is_null());
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(pdyn_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/padyn.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["pdyn_context_new_zp", "pdyn_padic_mul", "pdyn_map_eval", "pdyn_run_json", "PDYN_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from the header");
    }
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let src = std::env::temp_dir().join(format!("padyn_abi_{}.c", std::process::id()));
    std::fs::write(
        &src,
        r#"#include "padyn.h"
int use(void) {
    PdynContext *ctx = 0; PdynPAdic *x = 0; PdynMap *m = 0;
    if (pdyn_context_new_zp(3, 6, &ctx) != PDYN_STATUS_OK) return 1;
    pdyn_map_new(ctx, "shift_zp", &m);
    pdyn_padic_from_i64(3, 5, &x);
    pdyn_map_free(m); pdyn_padic_free(x); pdyn_context_free(ctx);
    return 0;
}
"#,
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&src);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
