//! C ABI over the `urbanfim` library.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `uf_*_new`/`uf_*_load`/`uf_*_mine` function and released by the matching
//! `uf_*_free`. Fallible calls return a [`UfStatus`]; on failure the message
//! is available from [`uf_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use urbanfim::clustering::{cut_by_distance, cut_by_k, ward_linkage, Dendrogram};
use urbanfim::fim::{
    build_database, database_from_transaction_set, mine_frequent_itemsets, write_itemsets_csv,
    FrequentItemset, MiningParams, TransactionDatabase,
};
use urbanfim::geo::{load_feature_collection, LandUseLayer};
use urbanfim::neighborhood::{export_transactions, extract_transactions, read_transactions, TransactionSet};
use urbanfim::pipeline::{run_pipeline, PipelineConfig};
use urbanfim::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    DataError = 4,
    StageError = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// A land-use layer.
pub struct UfLayer(LandUseLayer);
/// Neighborhood transactions of one layer.
pub struct UfTransactionSet(TransactionSet);
/// An encoded transaction database ready for mining.
pub struct UfDatabase(TransactionDatabase);
/// Frequent itemsets in canonical order.
pub struct UfItemsets {
    sets: Vec<FrequentItemset>,
    keys: Vec<CString>,
}
/// A Ward dendrogram.
pub struct UfDendrogram(Dendrogram);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UfStatus {
    match e.kind() {
        ErrorKind::Config => UfStatus::ConfigError,
        ErrorKind::Data => UfStatus::DataError,
        ErrorKind::Stage => UfStatus::StageError,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (UfStatus, String)>) -> UfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            UfStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (UfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (UfStatus, String) {
    (UfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (UfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (UfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (UfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn out_ptr<T>(out: *mut *mut T, value: T) -> Result<(), (UfStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a GeoJSON land-use layer.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uf_layer_load(
    path: *const c_char,
    code_attribute: *const c_char,
    city_name: *const c_char,
    out: *mut *mut UfLayer,
) -> UfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let attr = str_arg(code_attribute, "code_attribute")?;
        let city = str_arg(city_name, "city_name")?;
        let layer = load_feature_collection(path, attr, city).map_err(lib_err)?;
        out_ptr(out, UfLayer(layer))
    })
}

/// # Safety
/// `layer` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn uf_layer_feature_count(layer: *const UfLayer) -> usize {
    layer.as_ref().map_or(0, |l| l.0.len())
}

/// # Safety
/// `layer` must come from `uf_layer_load` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uf_layer_free(layer: *mut UfLayer) {
    if !layer.is_null() {
        drop(Box::from_raw(layer));
    }
}

/// One transaction per polygon: its own code plus every code within
/// `buffer_distance` meters.
///
/// # Safety
/// `layer` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uf_transactions_extract(
    layer: *const UfLayer,
    buffer_distance: f64,
    out: *mut *mut UfTransactionSet,
) -> UfStatus {
    guard(|| {
        let layer = handle(layer, "layer")?;
        let ts = extract_transactions(&layer.0, buffer_distance).map_err(lib_err)?;
        out_ptr(out, UfTransactionSet(ts))
    })
}

/// # Safety
/// `ts` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn uf_transactions_count(ts: *const UfTransactionSet) -> usize {
    ts.as_ref().map_or(0, |t| t.0.transactions.len())
}

/// Writes the space-separated transactions file.
///
/// # Safety
/// `ts` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn uf_transactions_write(ts: *const UfTransactionSet, path: *const c_char) -> UfStatus {
    guard(|| {
        let ts = handle(ts, "transactions")?;
        let path = str_arg(path, "path")?;
        export_transactions(&ts.0, path).map_err(lib_err)
    })
}

/// # Safety
/// `ts` must come from `uf_transactions_extract` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uf_transactions_free(ts: *mut UfTransactionSet) {
    if !ts.is_null() {
        drop(Box::from_raw(ts));
    }
}

/// # Safety
/// `ts` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uf_database_from_transactions(
    ts: *const UfTransactionSet,
    out: *mut *mut UfDatabase,
) -> UfStatus {
    guard(|| {
        let ts = handle(ts, "transactions")?;
        let db = database_from_transaction_set(&ts.0).map_err(lib_err)?;
        out_ptr(out, UfDatabase(db))
    })
}

/// Reads a space-separated transactions file.
///
/// # Safety
/// `path` NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uf_database_read(path: *const c_char, out: *mut *mut UfDatabase) -> UfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let db = build_database(read_transactions(path).map_err(lib_err)?).map_err(lib_err)?;
        out_ptr(out, UfDatabase(db))
    })
}

/// # Safety
/// `db` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn uf_database_transaction_count(db: *const UfDatabase) -> usize {
    db.as_ref().map_or(0, |d| d.0.n())
}

/// # Safety
/// `db` must come from a `uf_database_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uf_database_free(db: *mut UfDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

unsafe fn mine(db: *const UfDatabase, params: Result<MiningParams, Error>, out: *mut *mut UfItemsets) -> UfStatus {
    guard(|| {
        let db = handle(db, "database")?;
        let params = params.map_err(lib_err)?;
        let sets = mine_frequent_itemsets(&db.0, &params);
        let keys = sets
            .iter()
            .map(|f| CString::new(f.key()).expect("tokens contain no nul"))
            .collect();
        out_ptr(out, UfItemsets { sets, keys })
    })
}

/// Mines with a relative minimum support in (0, 1].
///
/// # Safety
/// `db` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uf_itemsets_mine(db: *const UfDatabase, minsup: f64, out: *mut *mut UfItemsets) -> UfStatus {
    mine(db, MiningParams::relative(minsup), out)
}

/// Mines with an absolute minimum support (transaction count).
///
/// # Safety
/// `db` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uf_itemsets_mine_absolute(
    db: *const UfDatabase,
    minsup: u64,
    out: *mut *mut UfItemsets,
) -> UfStatus {
    mine(db, MiningParams::absolute(minsup), out)
}

/// # Safety
/// `its` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn uf_itemsets_count(its: *const UfItemsets) -> usize {
    its.as_ref().map_or(0, |i| i.sets.len())
}

/// Space-separated items of itemset `index`; owned by the handle.
///
/// # Safety
/// `its` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn uf_itemsets_key(its: *const UfItemsets, index: usize) -> *const c_char {
    its.as_ref()
        .and_then(|i| i.keys.get(index))
        .map_or(ptr::null(), |k| k.as_ptr())
}

/// # Safety
/// `its` must be a live handle; the out pointers writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn uf_itemsets_support(
    its: *const UfItemsets,
    index: usize,
    support: *mut u64,
    relative_support: *mut f64,
) -> UfStatus {
    guard(|| {
        let its = handle(its, "itemsets")?;
        let fi = its
            .sets
            .get(index)
            .ok_or_else(|| (UfStatus::OutOfRange, format!("itemset index {index} out of range")))?;
        if let Some(s) = support.as_mut() {
            *s = fi.support;
        }
        if let Some(r) = relative_support.as_mut() {
            *r = fi.relative_support;
        }
        Ok(())
    })
}

/// # Safety
/// `its` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn uf_itemsets_write_csv(its: *const UfItemsets, path: *const c_char) -> UfStatus {
    guard(|| {
        let its = handle(its, "itemsets")?;
        let path = str_arg(path, "path")?;
        write_itemsets_csv(&its.sets, path).map_err(lib_err)
    })
}

/// # Safety
/// `its` must come from `uf_itemsets_mine*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uf_itemsets_free(its: *mut UfItemsets) {
    if !its.is_null() {
        drop(Box::from_raw(its));
    }
}

/// Ward linkage of `n` points given as separate coordinate arrays. Leaves
/// are named by their index.
///
/// # Safety
/// `xs` and `ys` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uf_dendrogram_ward(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    out: *mut *mut UfDendrogram,
) -> UfStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() {
            return Err(null("coordinates"));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let ys = std::slice::from_raw_parts(ys, n);
        let points: Vec<[f64; 2]> = xs.iter().zip(ys).map(|(&x, &y)| [x, y]).collect();
        let names = (0..n).map(|i| i.to_string()).collect();
        let d = ward_linkage(names, &points).map_err(lib_err)?;
        out_ptr(out, UfDendrogram(d))
    })
}

/// # Safety
/// `d` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn uf_dendrogram_merge_count(d: *const UfDendrogram) -> usize {
    d.as_ref().map_or(0, |d| d.0.merges.len())
}

/// Merge `index`: joined node ids, height (ESS increase) and new cluster size.
///
/// # Safety
/// `d` must be a live handle; the out pointers writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn uf_dendrogram_merge(
    d: *const UfDendrogram,
    index: usize,
    left: *mut usize,
    right: *mut usize,
    height: *mut f64,
    size: *mut usize,
) -> UfStatus {
    guard(|| {
        let d = handle(d, "dendrogram")?;
        let m = d
            .0
            .merges
            .get(index)
            .ok_or_else(|| (UfStatus::OutOfRange, format!("merge index {index} out of range")))?;
        if let Some(p) = left.as_mut() {
            *p = m.left;
        }
        if let Some(p) = right.as_mut() {
            *p = m.right;
        }
        if let Some(p) = height.as_mut() {
            *p = m.height;
        }
        if let Some(p) = size.as_mut() {
            *p = m.size;
        }
        Ok(())
    })
}

unsafe fn write_labels(labels: &[usize], out: *mut usize, len: usize) -> Result<(), (UfStatus, String)> {
    if out.is_null() {
        return Err(null("labels"));
    }
    if len < labels.len() {
        return Err((UfStatus::OutOfRange, format!("labels buffer needs {} entries", labels.len())));
    }
    std::slice::from_raw_parts_mut(out, labels.len()).copy_from_slice(labels);
    Ok(())
}

/// Cluster label of every leaf for a cut into `k` clusters.
///
/// # Safety
/// `d` must be a live handle; `labels` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn uf_dendrogram_cut_k(
    d: *const UfDendrogram,
    k: usize,
    labels: *mut usize,
    len: usize,
) -> UfStatus {
    guard(|| {
        let d = handle(d, "dendrogram")?;
        let a = cut_by_k(&d.0, k).map_err(lib_err)?;
        write_labels(&a.labels, labels, len)
    })
}

/// Cluster label of every leaf after removing merges above `height`.
///
/// # Safety
/// `d` must be a live handle; `labels` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn uf_dendrogram_cut_distance(
    d: *const UfDendrogram,
    height: f64,
    labels: *mut usize,
    len: usize,
) -> UfStatus {
    guard(|| {
        let d = handle(d, "dendrogram")?;
        let a = cut_by_distance(&d.0, height).map_err(lib_err)?;
        write_labels(&a.labels, labels, len)
    })
}

/// # Safety
/// `d` must come from `uf_dendrogram_ward` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uf_dendrogram_free(d: *mut UfDendrogram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Runs the full pipeline from a JSON config file.
///
/// # Safety
/// `config_path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn uf_pipeline_run(config_path: *const c_char) -> UfStatus {
    guard(|| {
        let path = str_arg(config_path, "config_path")?;
        let cfg = PipelineConfig::from_file(path).map_err(lib_err)?;
        run_pipeline(&cfg).map_err(lib_err)?;
        Ok(())
    })
}
