//! C interface to the embanks engine.
//!
//! Stores and query results are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`EmbanksStatus`]; on failure the message is kept per thread and read with
//! [`embanks_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use embanks::engine::{two_phase_query, EngineConfig, QueryResult};
use embanks::search::Algorithm;
use embanks::storage::Store;
use embanks::Error;

/// Result codes of fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbanksStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    CorruptStore = 4,
    NoAnswer = 5,
    InvalidConfig = 6,
    InvalidInput = 7,
    OutOfRange = 8,
    Panic = 9,
}

pub struct EmbanksStore(Store);

pub struct EmbanksResult(QueryResult);

/// Query settings. Obtain defaults from [`embanks_query_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EmbanksQueryConfig {
    pub k: u32,
    pub phase1_limit: u32,
    pub gamma: f64,
    pub memory_budget_bytes: u64,
    /// 0 backward, 1 bidirectional.
    pub phase1_algorithm: u32,
    pub phase2_algorithm: u32,
    pub lambda: f64,
    pub mu: f64,
    /// 0 means no limit.
    pub candidate_budget: u32,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EmbanksAnswer {
    pub score: f64,
    pub node_score: f64,
    pub edge_score: f64,
    pub root: u32,
    pub node_count: u32,
    pub edge_count: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EmbanksStats {
    pub nodes_touched: u64,
    pub nodes_explored: u64,
    pub elapsed_micros: u64,
    pub clusters_read: u64,
    pub expanded_clusters: u64,
    pub refetch_events: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EmbanksStatus {
    match e {
        Error::Io { .. } => EmbanksStatus::Io,
        Error::BadMagic { .. }
        | Error::VersionMismatch { .. }
        | Error::Truncated { .. }
        | Error::Checksum { .. }
        | Error::Corrupt { .. } => EmbanksStatus::CorruptStore,
        Error::NoAnswer { .. } | Error::EmptyKeywordSet { .. } => EmbanksStatus::NoAnswer,
        Error::Config(_) => EmbanksStatus::InvalidConfig,
        _ => EmbanksStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), EmbanksStatus>) -> EmbanksStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmbanksStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            EmbanksStatus::Panic
        }
    }
}

fn fail(e: Error) -> EmbanksStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, EmbanksStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(EmbanksStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        EmbanksStatus::InvalidUtf8
    })
}

fn algorithm(code: u32) -> Result<Algorithm, EmbanksStatus> {
    match code {
        0 => Ok(Algorithm::Backward),
        1 => Ok(Algorithm::Bidirectional),
        _ => {
            set_error(format!("unknown algorithm code {code}"));
            Err(EmbanksStatus::InvalidConfig)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn embanks_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn embanks_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Opens the store in directory `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn embanks_store_open(dir: *const c_char, out: *mut *mut EmbanksStore) -> EmbanksStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return Err(EmbanksStatus::NullArgument);
        }
        *out = ptr::null_mut();
        let dir = str_arg(dir, "dir")?;
        let store = Store::open(Path::new(dir)).map_err(fail)?;
        *out = Box::into_raw(Box::new(EmbanksStore(store)));
        Ok(())
    })
}

/// # Safety
/// `store` must come from [`embanks_store_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn embanks_store_free(store: *mut EmbanksStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Number of clusters, or 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live store handle.
#[no_mangle]
pub unsafe extern "C" fn embanks_store_cluster_count(store: *const EmbanksStore) -> u64 {
    store.as_ref().map_or(0, |s| s.0.cluster_count() as u64)
}

/// Node count of the stored graph, or 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live store handle.
#[no_mangle]
pub unsafe extern "C" fn embanks_store_node_count(store: *const EmbanksStore) -> u64 {
    store.as_ref().map_or(0, |s| s.0.clustering().node_count() as u64)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn embanks_query_config_default(out: *mut EmbanksQueryConfig) -> EmbanksStatus {
    let Some(out) = out.as_mut() else {
        set_error("out is null");
        return EmbanksStatus::NullArgument;
    };
    let d = EngineConfig::default();
    *out = EmbanksQueryConfig {
        k: d.search.k as u32,
        phase1_limit: d.phase1_limit as u32,
        gamma: d.gamma,
        memory_budget_bytes: d.memory_budget_bytes,
        phase1_algorithm: d.phase1_algorithm as u32,
        phase2_algorithm: d.phase2_algorithm as u32,
        lambda: d.search.score.lambda,
        mu: d.search.mu,
        candidate_budget: d.search.candidate_budget.unwrap_or(0) as u32,
        seed: d.seed,
    };
    EmbanksStatus::Ok
}

/// Runs a two-phase query for whitespace-separated `keywords`. A null
/// `config` uses the defaults.
///
/// # Safety
/// `store` must be a live store handle, `keywords` a NUL-terminated string,
/// `config` null or valid, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn embanks_query(
    store: *const EmbanksStore,
    keywords: *const c_char,
    config: *const EmbanksQueryConfig,
    out: *mut *mut EmbanksResult,
) -> EmbanksStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return Err(EmbanksStatus::NullArgument);
        }
        *out = ptr::null_mut();
        let Some(store) = store.as_ref() else {
            set_error("store is null");
            return Err(EmbanksStatus::NullArgument);
        };
        let terms: Vec<&str> = str_arg(keywords, "keywords")?.split_whitespace().collect();
        let mut cfg = EngineConfig::default();
        if let Some(c) = config.as_ref() {
            cfg.search.k = c.k as usize;
            cfg.phase1_limit = c.phase1_limit as usize;
            cfg.gamma = c.gamma;
            cfg.memory_budget_bytes = c.memory_budget_bytes;
            cfg.phase1_algorithm = algorithm(c.phase1_algorithm)?;
            cfg.phase2_algorithm = algorithm(c.phase2_algorithm)?;
            cfg.search.score.lambda = c.lambda;
            cfg.search.mu = c.mu;
            cfg.search.candidate_budget = (c.candidate_budget > 0).then_some(c.candidate_budget as usize);
            cfg.seed = c.seed;
        }
        let r = two_phase_query(&store.0, &terms, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(EmbanksResult(r)));
        Ok(())
    })
}

/// # Safety
/// `result` must come from [`embanks_query`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn embanks_result_free(result: *mut EmbanksResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of answers, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn embanks_result_len(result: *const EmbanksResult) -> u64 {
    result.as_ref().map_or(0, |r| r.0.answers.len() as u64)
}

/// # Safety
/// `result` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn embanks_result_answer(
    result: *const EmbanksResult,
    index: u64,
    out: *mut EmbanksAnswer,
) -> EmbanksStatus {
    let (Some(r), Some(out)) = (result.as_ref(), out.as_mut()) else {
        set_error("null argument");
        return EmbanksStatus::NullArgument;
    };
    let Some(a) = r.0.answers.get(index as usize) else {
        set_error(format!("answer {index} out of range"));
        return EmbanksStatus::OutOfRange;
    };
    *out = EmbanksAnswer {
        score: a.score,
        node_score: a.node_score,
        edge_score: a.edge_score,
        root: a.tree.root(),
        node_count: a.tree.node_count() as u32,
        edge_count: a.tree.edge_count() as u32,
    };
    EmbanksStatus::Ok
}

/// Copies up to `capacity` node ids of answer `index` into `buf` and returns
/// the answer's total node count (0 on a bad handle or index).
///
/// # Safety
/// `result` must be a live result handle; `buf` must hold `capacity` ids or
/// be null when `capacity` is 0.
#[no_mangle]
pub unsafe extern "C" fn embanks_result_nodes(
    result: *const EmbanksResult,
    index: u64,
    buf: *mut u32,
    capacity: u64,
) -> u64 {
    let Some(a) = result.as_ref().and_then(|r| r.0.answers.get(index as usize)) else {
        return 0;
    };
    let nodes = a.tree.nodes();
    if !buf.is_null() {
        let n = nodes.len().min(capacity as usize);
        ptr::copy_nonoverlapping(nodes.as_ptr(), buf, n);
    }
    nodes.len() as u64
}

/// # Safety
/// `result` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn embanks_result_stats(result: *const EmbanksResult, out: *mut EmbanksStats) -> EmbanksStatus {
    let (Some(r), Some(out)) = (result.as_ref(), out.as_mut()) else {
        set_error("null argument");
        return EmbanksStatus::NullArgument;
    };
    let r = &r.0;
    *out = EmbanksStats {
        nodes_touched: r.stats.nodes_touched,
        nodes_explored: r.stats.nodes_explored,
        elapsed_micros: r.stats.elapsed.as_micros() as u64,
        clusters_read: r.clusters_read,
        expanded_clusters: r.expanded_cluster_ids.len() as u64,
        refetch_events: r.refetch_events as u64,
    };
    EmbanksStatus::Ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use embanks::clustering::Clustering;
    use embanks::graph::{GraphBuilder, NodeMeta};
    use embanks::index::{IndexOptions, KeywordIndex};
    use embanks::storage::{build_store, BuildOptions};

    fn make_store() -> tempfile::TempDir {
        let n = 4;
        let mut b = GraphBuilder::with_nodes(vec![1.0; n], vec![0; n]);
        b.add_link(0, 1, 1.0, 2.0, 1.0);
        b.add_link(0, 2, 1.0, 2.0, 1.0);
        b.add_link(2, 3, 1.0, 2.0, 1.0);
        let g = b.build().unwrap();
        let meta = NodeMeta {
            tables: vec!["t".into()],
            keys: (0..n).map(|i| i.to_string()).collect(),
            texts: ["root", "apple", "x", "pear"].map(String::from).to_vec(),
        };
        let idx = KeywordIndex::build(&meta, g.node_types(), IndexOptions::default());
        let dir = tempfile::tempdir().unwrap();
        let c = Clustering::from_mapping(vec![0, 0, 1, 1], 2).unwrap();
        build_store(dir.path(), &g, &meta, &idx, &c, BuildOptions::default()).unwrap();
        dir
    }

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn version_is_set() {
        let v = unsafe { CStr::from_ptr(embanks_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn open_query_and_free() {
        let dir = make_store();
        let path = cstr(dir.path().to_str().unwrap());
        unsafe {
            let mut store = ptr::null_mut();
            assert_eq!(embanks_store_open(path.as_ptr(), &mut store), EmbanksStatus::Ok);
            assert_eq!(embanks_store_cluster_count(store), 2);
            assert_eq!(embanks_store_node_count(store), 4);

            let mut cfg = EmbanksQueryConfig {
                k: 0,
                phase1_limit: 0,
                gamma: 0.0,
                memory_budget_bytes: 0,
                phase1_algorithm: 0,
                phase2_algorithm: 0,
                lambda: 0.0,
                mu: 0.0,
                candidate_budget: 0,
                seed: 0,
            };
            assert_eq!(embanks_query_config_default(&mut cfg), EmbanksStatus::Ok);
            assert_eq!(cfg.k, 10);
            let kw = cstr("apple pear");
            let mut res = ptr::null_mut();
            assert_eq!(embanks_query(store, kw.as_ptr(), &cfg, &mut res), EmbanksStatus::Ok);
            let len = embanks_result_len(res);
            assert!(len >= 1);
            let mut a = EmbanksAnswer::default();
            assert_eq!(embanks_result_answer(res, 0, &mut a), EmbanksStatus::Ok);
            assert_eq!((a.node_count, a.edge_count), (4, 3));
            let mut buf = [0u32; 8];
            assert_eq!(embanks_result_nodes(res, 0, buf.as_mut_ptr(), 8), 4);
            let mut nodes = buf[..4].to_vec();
            nodes.sort_unstable();
            assert_eq!(nodes, [0, 1, 2, 3]);
            assert_eq!(embanks_result_nodes(res, 0, ptr::null_mut(), 0), 4);
            assert_eq!(embanks_result_answer(res, len, &mut a), EmbanksStatus::OutOfRange);
            let mut st = EmbanksStats::default();
            assert_eq!(embanks_result_stats(res, &mut st), EmbanksStatus::Ok);
            assert_eq!(st.expanded_clusters, 2);
            embanks_result_free(res);

            let kw = cstr("apple banana");
            assert_eq!(embanks_query(store, kw.as_ptr(), ptr::null(), &mut res), EmbanksStatus::NoAnswer);
            assert!(res.is_null());
            let msg = CStr::from_ptr(embanks_last_error()).to_str().unwrap();
            assert!(msg.contains("banana"));
            embanks_store_free(store);
        }
    }

    #[test]
    fn errors_are_reported() {
        unsafe {
            let mut store = ptr::null_mut();
            assert_eq!(embanks_store_open(ptr::null(), &mut store), EmbanksStatus::NullArgument);
            let missing = cstr("/nonexistent/embanks/store");
            assert_eq!(embanks_store_open(missing.as_ptr(), &mut store), EmbanksStatus::Io);
            assert!(store.is_null());
            let dir = make_store();
            std::fs::write(dir.path().join("graph.emb"), b"EMBK\x01\x00garbage").unwrap();
            let p = cstr(dir.path().to_str().unwrap());
            assert_eq!(embanks_store_open(p.as_ptr(), &mut store), EmbanksStatus::CorruptStore);
            assert_eq!(embanks_result_len(ptr::null()), 0);
            embanks_store_free(ptr::null_mut());
            embanks_result_free(ptr::null_mut());
        }
    }
}
