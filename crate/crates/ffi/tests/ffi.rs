use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use domainbal_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    db_string_free(s);
    out
}

fn last_error() -> String {
    let p = db_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn toy_table() -> *mut DbDfTable {
    let corpora = [c("apple apple pear"), c("pear kiwi")];
    let names = [c("a"), c("b")];
    let cp: Vec<*const c_char> = corpora.iter().map(|s| s.as_ptr()).collect();
    let np: Vec<*const c_char> = names.iter().map(|s| s.as_ptr()).collect();
    let mut t = ptr::null_mut();
    assert_eq!(db_df_build(cp.as_ptr(), np.as_ptr(), 2, 100.0, &mut t), DbStatus::Ok);
    t
}

#[test]
fn version_and_tokenize() {
    let v = unsafe { CStr::from_ptr(db_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(db_tokenize(c("Hello, World!").as_ptr(), true, true, &mut out), DbStatus::Ok);
        assert_eq!(take(out), "hello world");
        assert_eq!(db_tokenize(ptr::null(), true, true, &mut out), DbStatus::NullPointer);
        assert!(last_error().contains("raw"));
        let bad = [0xffu8, 0];
        assert_eq!(db_tokenize(bad.as_ptr().cast(), true, true, &mut out), DbStatus::InvalidUtf8);
    }
}

#[test]
fn df_lookup_and_roundtrip() {
    unsafe {
        let t = toy_table();
        assert_eq!(db_df_num_corpora(t), 2);
        let (mut df, mut adf) = (f64::NAN, f64::NAN);
        assert_eq!(db_df_lookup(t, c("apple").as_ptr(), 0, &mut df, &mut adf), DbStatus::Ok);
        assert_eq!((df, adf), (1.0, 100.0));
        assert_eq!(db_df_lookup(t, c("kiwi").as_ptr(), 1, &mut df, ptr::null_mut()), DbStatus::Ok);
        assert_eq!(df, 0.0);
        assert_eq!(db_df_lookup(t, c("apple").as_ptr(), 5, &mut df, &mut adf), DbStatus::OutOfRange);

        let dir = tempfile::tempdir().unwrap();
        let path = c(dir.path().join("df.tsv").to_str().unwrap());
        assert_eq!(db_df_write(t, path.as_ptr()), DbStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(db_df_load(path.as_ptr(), &mut back), DbStatus::Ok);
        assert_eq!(db_df_lookup(back, c("apple").as_ptr(), 0, &mut df, &mut adf), DbStatus::Ok);
        assert_eq!((df, adf), (1.0, 100.0));
        db_df_free(back);
        db_df_free(t);
        db_df_free(ptr::null_mut());

        assert_eq!(db_df_load(c("/nonexistent/df.tsv").as_ptr(), &mut back), DbStatus::Io);
        let one = c("a b");
        let cp = [one.as_ptr()];
        assert_eq!(db_df_build(cp.as_ptr(), ptr::null(), 1, 1.0, &mut back), DbStatus::InvalidArgument);
    }
}

#[test]
fn scoring() {
    unsafe {
        let mut r = DbRouge::default();
        assert_eq!(db_rouge1(c("the cat cat").as_ptr(), c("a cat dog").as_ptr(), &mut r), DbStatus::Ok);
        assert_eq!((r.precision, r.recall), (0.5, 0.5));

        let t = toy_table();
        let resp = [c("apple pear"), c("apple")];
        let rp: Vec<*const c_char> = resp.iter().map(|s| s.as_ptr()).collect();
        let mut score = 0.0;
        assert_eq!(db_alpha_df_score(t, rp.as_ptr(), 2, 0, false, &mut score), DbStatus::Ok);
        assert!((score - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(db_alpha_df_score(t, rp.as_ptr(), 2, 0, true, &mut score), DbStatus::Ok);
        assert!((score - 50.0).abs() < 1e-12);
        assert_eq!(db_alpha_df_score(t, rp.as_ptr(), 0, 0, false, &mut score), DbStatus::InvalidArgument);
        db_df_free(t);
    }
}

fn cli(args: &[&str]) {
    let code = domainbal::cli::run(std::iter::once("domainbal").chain(args.iter().copied()));
    assert_eq!(code, 0, "{args:?}");
}

#[test]
fn model_generation() {
    let dir = tempfile::tempdir().unwrap();
    let path = |p: &str| dir.path().join(p).to_str().unwrap().to_string();
    let (data, other, registry, model) = (path("data"), path("other"), path("data/registry.json"), path("m.ckpt"));
    cli(&["ingest", "--synthetic", "2x12", "--out", &data]);
    cli(&["train", "--registry", &registry, "--method", "labeled", "--epochs", "1", "--dim", "6", "--out", &model]);
    let reg = c(&registry);
    let ckpt = c(&model);
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(db_model_load(ckpt.as_ptr(), reg.as_ptr(), &mut m), DbStatus::Ok);
        let mut out = ptr::null_mut();
        let ctx = c("what is the weather");
        assert_eq!(db_model_generate(m, ctx.as_ptr(), -1, 5, &mut out), DbStatus::Precondition);
        assert!(last_error().contains("corpus embedding"));
        assert_eq!(db_model_generate(m, ctx.as_ptr(), 7, 5, &mut out), DbStatus::OutOfRange);
        assert_eq!(db_model_generate(m, ctx.as_ptr(), 1, 5, &mut out), DbStatus::Ok);
        let first = take(out);
        assert!(first.split_whitespace().count() <= 5);
        assert_eq!(db_model_generate(m, ctx.as_ptr(), 1, 5, &mut out), DbStatus::Ok);
        assert_eq!(take(out), first);
        db_model_free(m);

        cli(&["ingest", "--synthetic", "2x12", "--seed", "1", "--out", &other]);
        let other = c(&path("other/registry.json"));
        assert_eq!(db_model_load(ckpt.as_ptr(), other.as_ptr(), &mut m), DbStatus::Precondition);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/domainbal.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["db_df_build", "db_model_generate", "db_last_error", "DB_STATUS_PRECONDITION"] {
        assert!(text.contains(f), "{f}");
    }
    let status = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
        .expect("C compiler available");
    assert!(status.success());
}
