use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use urbanfim::fixtures::{village_layer, VILLAGE_BUFFER, VILLAGE_TRANSACTIONS_TEXT};
use urbanfim::geo::write_feature_collection;
use urbanfim_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn c_path(p: &Path) -> CString {
    c(p.to_str().unwrap())
}

fn last_error() -> String {
    let p = uf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn layer_to_itemsets_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("t1.geojson");
    write_feature_collection(&village_layer(), &geo).unwrap();
    unsafe {
        let mut layer = ptr::null_mut();
        let attr = c(urbanfim::geo::DEFAULT_CODE_ATTRIBUTE);
        assert_eq!(uf_layer_load(c_path(&geo).as_ptr(), attr.as_ptr(), c("T1").as_ptr(), &mut layer), UfStatus::Ok);
        assert_eq!(uf_layer_feature_count(layer), 7);

        let mut ts = ptr::null_mut();
        assert_eq!(uf_transactions_extract(layer, VILLAGE_BUFFER, &mut ts), UfStatus::Ok);
        assert_eq!(uf_transactions_count(ts), 7);
        let tx_path = dir.path().join("t1.txt");
        assert_eq!(uf_transactions_write(ts, c_path(&tx_path).as_ptr()), UfStatus::Ok);
        assert_eq!(std::fs::read_to_string(&tx_path).unwrap(), VILLAGE_TRANSACTIONS_TEXT);

        let mut db = ptr::null_mut();
        assert_eq!(uf_database_from_transactions(ts, &mut db), UfStatus::Ok);
        assert_eq!(uf_database_transaction_count(db), 7);

        let mut its = ptr::null_mut();
        assert_eq!(uf_itemsets_mine_absolute(db, 3, &mut its), UfStatus::Ok);
        assert_eq!(uf_itemsets_count(its), 9);
        let first = CStr::from_ptr(uf_itemsets_key(its, 0)).to_str().unwrap();
        assert_eq!(first, "B");
        let (mut sup, mut rel) = (0u64, 0f64);
        assert_eq!(uf_itemsets_support(its, 0, &mut sup, &mut rel), UfStatus::Ok);
        assert_eq!(sup, 6);
        assert!((rel - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(uf_itemsets_support(its, 99, &mut sup, ptr::null_mut()), UfStatus::OutOfRange);
        assert!(uf_itemsets_key(its, 99).is_null());
        let csv = dir.path().join("t1.csv");
        assert_eq!(uf_itemsets_write_csv(its, c_path(&csv).as_ptr()), UfStatus::Ok);
        assert!(std::fs::read_to_string(&csv).unwrap().starts_with("itemset,support"));

        uf_itemsets_free(its);
        uf_database_free(db);
        uf_transactions_free(ts);
        uf_layer_free(layer);
    }
}

#[test]
fn database_from_file_and_relative_minsup() {
    let dir = tempfile::tempdir().unwrap();
    let tx = dir.path().join("t.txt");
    std::fs::write(&tx, VILLAGE_TRANSACTIONS_TEXT).unwrap();
    unsafe {
        let mut db = ptr::null_mut();
        assert_eq!(uf_database_read(c_path(&tx).as_ptr(), &mut db), UfStatus::Ok);
        let mut its = ptr::null_mut();
        assert_eq!(uf_itemsets_mine(db, 3.0 / 7.0, &mut its), UfStatus::Ok);
        assert_eq!(uf_itemsets_count(its), 9);
        uf_itemsets_free(its);
        let mut bad = ptr::null_mut();
        assert_eq!(uf_itemsets_mine(db, 1.5, &mut bad), UfStatus::ConfigError);
        assert!(bad.is_null());
        uf_database_free(db);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut layer = ptr::null_mut();
        let s = uf_layer_load(c("/nonexistent.geojson").as_ptr(), c("code").as_ptr(), c("X").as_ptr(), &mut layer);
        assert_eq!(s, UfStatus::DataError);
        assert!(last_error().contains("nonexistent"));
        assert!(layer.is_null());

        assert_eq!(uf_layer_load(ptr::null(), ptr::null(), ptr::null(), &mut layer), UfStatus::NullPointer);
        assert!(last_error().contains("null"));

        let bad = [0xffu8, 0];
        assert_eq!(
            uf_layer_load(bad.as_ptr().cast(), c("a").as_ptr(), c("b").as_ptr(), &mut layer),
            UfStatus::InvalidUtf8
        );
        let mut ts = ptr::null_mut();
        assert_eq!(uf_transactions_extract(ptr::null(), 1.0, &mut ts), UfStatus::NullPointer);
        assert_eq!(uf_layer_feature_count(ptr::null()), 0);
        uf_layer_free(ptr::null_mut());
    }
}

#[test]
fn dendrogram_handles() {
    let xs = [0.0, 1.0, 10.0, 11.0];
    let ys = [0.0; 4];
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(uf_dendrogram_ward(xs.as_ptr(), ys.as_ptr(), 4, &mut d), UfStatus::Ok);
        assert_eq!(uf_dendrogram_merge_count(d), 3);
        let (mut l, mut r, mut h, mut s) = (0usize, 0usize, 0f64, 0usize);
        assert_eq!(uf_dendrogram_merge(d, 0, &mut l, &mut r, &mut h, &mut s), UfStatus::Ok);
        assert_eq!((l, r, s), (0, 1, 2));
        assert!((h - 0.5).abs() < 1e-12);
        let mut labels = [9usize; 4];
        assert_eq!(uf_dendrogram_cut_k(d, 2, labels.as_mut_ptr(), 4), UfStatus::Ok);
        assert_eq!(labels, [0, 0, 1, 1]);
        assert_eq!(uf_dendrogram_cut_distance(d, 1e9, labels.as_mut_ptr(), 4), UfStatus::Ok);
        assert_eq!(labels, [0; 4]);
        assert_eq!(uf_dendrogram_cut_k(d, 2, labels.as_mut_ptr(), 3), UfStatus::OutOfRange);
        assert_eq!(uf_dendrogram_cut_k(d, 7, labels.as_mut_ptr(), 4), UfStatus::ConfigError);
        uf_dendrogram_free(d);

        let mut one = ptr::null_mut();
        assert_eq!(uf_dendrogram_ward(xs.as_ptr(), ys.as_ptr(), 1, &mut one), UfStatus::ConfigError);
    }
}

#[test]
fn pipeline_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = urbanfim::pipeline::write_synthetic_bundle(dir.path(), 7).unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    unsafe {
        assert_eq!(uf_pipeline_run(c_path(&path).as_ptr()), UfStatus::Ok);
        assert_eq!(uf_pipeline_run(c("/nonexistent.json").as_ptr()), UfStatus::DataError);
    }
    assert!(dir.path().join("out/manifest.json").is_file());
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(uf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/urbanfim.h")).unwrap();
    for name in [
        "typedef struct UfLayer UfLayer;",
        "UF_STATUS_OK = 0",
        "uf_last_error_message",
        "uf_layer_load",
        "uf_transactions_extract",
        "uf_itemsets_mine",
        "uf_dendrogram_ward",
        "uf_pipeline_run",
        "size_t uf_itemsets_count",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|cc| {
        std::process::Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success())
    }) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"urbanfim.h\"\nint main(void) { UfLayer *l = 0; return uf_layer_feature_count(l) == 0 ? 0 : 1; }\n",
    )
    .unwrap();
    let out = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
