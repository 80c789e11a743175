use std::ffi::{c_char, c_int, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use todalab_ffi::*;

fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { tl_string_free(p) };
    s
}

fn scalar(text: &str) -> *mut TlScalar {
    let src = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tl_scalar_parse(src.as_ptr(), &mut out) }, TlStatus::Ok);
    out
}

fn render(a: *const TlScalar) -> String {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tl_scalar_to_string(a, &mut s) }, TlStatus::Ok);
    take_string(s)
}

#[test]
fn scalar_arithmetic() {
    let a = scalar("1/(1 - q)");
    let b = scalar("q");
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { tl_scalar_binary(TlBinaryOp::Mul, a, b, &mut c) }, TlStatus::Ok);
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { tl_scalar_binary(TlBinaryOp::Sub, a, c, &mut d) }, TlStatus::Ok);
    assert_eq!(render(d), "1");
    let one = scalar("1");
    let mut eq: c_int = 0;
    assert_eq!(unsafe { tl_scalar_equal(d, one, &mut eq) }, TlStatus::Ok);
    assert_eq!(eq, 1);
    for p in [a, b, c, d, one] {
        unsafe { tl_scalar_free(p) };
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let zero = scalar("0");
    let one = scalar("1");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tl_scalar_binary(TlBinaryOp::Div, one, zero, &mut out) }, TlStatus::DivisionByZero);
    assert!(out.is_null());
    let msg = unsafe { CStr::from_ptr(tl_last_error_message()) }.to_str().unwrap();
    assert!(msg.contains("division"), "{msg}");

    let bad = CString::new("(1 + q").unwrap();
    assert_eq!(unsafe { tl_scalar_parse(bad.as_ptr(), &mut out) }, TlStatus::ParseError);
    assert_eq!(unsafe { tl_scalar_parse(ptr::null(), &mut out) }, TlStatus::NullPointer);
    assert_eq!(unsafe { tl_scalar_to_string(ptr::null(), ptr::null_mut()) }, TlStatus::NullPointer);

    // success clears the message
    assert_eq!(unsafe { tl_scalar_from_int(3, &mut out) }, TlStatus::Ok);
    assert!(tl_last_error_message().is_null());
    unsafe {
        tl_scalar_free(out);
        tl_scalar_free(zero);
        tl_scalar_free(one);
    }
}

#[test]
fn series_handles() {
    let lambda = CString::new("(2,1)").unwrap();
    let mu = CString::new("(1)").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tl_series_schur(lambda.as_ptr(), ptr::null(), 3, &mut s) }, TlStatus::Ok);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { tl_series_to_string(s, &mut text) }, TlStatus::Ok);
    let full = take_string(text);
    assert!(full.contains("t1"), "{full}");
    let mut skew = ptr::null_mut();
    assert_eq!(unsafe { tl_series_schur(lambda.as_ptr(), mu.as_ptr(), 2, &mut skew) }, TlStatus::Ok);
    let mut sq = ptr::null_mut();
    assert_eq!(unsafe { tl_series_mul(skew, skew, &mut sq) }, TlStatus::Ok);

    let mut z = ptr::null_mut();
    assert_eq!(unsafe { tl_series_melting_z(1, 0, 3, 0, &mut z) }, TlStatus::Ok);
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { tl_series_constant_term(z, &mut c) }, TlStatus::Ok);
    // 1 + Q q/(1-q)^2 + ... begins with 1
    assert!(render(c).starts_with('('), "{}", render(c));
    assert_eq!(unsafe { tl_series_melting_z(3, 0, 3, 0, &mut z) }, TlStatus::InvalidArgument);
    unsafe {
        tl_series_free(s);
        tl_series_free(skew);
        tl_series_free(sq);
        tl_series_free(z);
        tl_scalar_free(c);
    }
}

#[test]
fn json_jobs() {
    let run = |job: &str| {
        let j = CString::new(job).unwrap();
        let mut out = ptr::null_mut();
        let mut code: c_int = -1;
        let st = unsafe { tl_run_command(j.as_ptr(), &mut out, &mut code) };
        let text = if out.is_null() { String::new() } else { take_string(out) };
        (st, code, text)
    };
    let (st, code, text) = run(r#"{"command": "partitions", "params": {"n": 4}, "format": "tsv"}"#);
    assert_eq!((st, code), (TlStatus::Ok, 0));
    assert_eq!(text.lines().count(), 6);
    let (st, code, _) = run(r#"{"command": "partitions", "params": {"n": 4, "bogus": 1}}"#);
    assert_eq!((st, code), (TlStatus::InvalidArgument, 2));
    let (st, code, text) = run(r#"{"command": "verify hirota", "params": {"provider": "constant", "charges": "0:0", "D": 2}}"#);
    assert_eq!((st, code), (TlStatus::VerificationFailed, 1));
    assert!(text.contains("\"pass\": false"));
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/todalab.h")).unwrap();
    for name in
        ["tl_run_command", "tl_last_error_message", "tl_string_free", "tl_scalar_parse", "tl_series_schur", "typedef struct TlScalar TlScalar"]
    {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Builds and runs a C program against the header and the static library.
#[test]
fn c_program_links_against_the_library() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; C smoke test not run");
        return;
    };
    let target_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target_dir.join("libtodalab_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = target_dir.join("todalab_c_smoke");
    let status = Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stdout));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1");
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok()).ok_or(())
}
