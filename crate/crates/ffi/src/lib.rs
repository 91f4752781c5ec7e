//! C interface to `vnsgm`.
//!
//! Objects cross the boundary as opaque pointers created by a `*_new` /
//! `*_load` call and released by the matching `*_free`. Every fallible call
//! returns a [`VnsStatus`]; on failure [`vns_last_error`] gives a message for
//! the calling thread. Strings handed out by `vns_*_json` are owned by the
//! caller and must be released with [`vns_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::ArrayView2;
use vnsgm::assignment::max_assignment;
use vnsgm::graph::{load_edge_list, Graph, Hops, SeedMap};
use vnsgm::{evaluate_tau, nominate, Error, Nomination, SoftSgmConfig, VnConfig};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VnsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    UnknownLabel = 4,
    InvalidArgument = 5,
    Io = 6,
    /// A `nominate` call found no seed within `h` hops; the handle is still
    /// produced and holds an empty list.
    NoLocalSeeds = 7,
    /// The requested item is not present (for example an absent truth).
    NotFound = 8,
    Panic = 99,
}

/// Parameters of [`vns_nominate`]. `h` or `ell` equal to [`VNS_HOPS_INFINITE`]
/// means unbounded.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct VnsConfig {
    pub h: u32,
    pub ell: u32,
    pub restarts: usize,
    pub gamma: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub rng_seed: u64,
}

pub const VNS_HOPS_INFINITE: u32 = u32::MAX;

pub struct VnsGraph(Graph);

pub struct VnsSeedMap(Vec<(String, String)>);

pub struct VnsNomination {
    inner: Nomination,
    labels: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> VnsStatus {
    match err {
        Error::Parse { .. } | Error::EmptyInput(_) | Error::Config(_) | Error::Json(_) | Error::Csv(_) => {
            VnsStatus::Parse
        }
        Error::UnknownLabel(_) => VnsStatus::UnknownLabel,
        Error::Io(_) => VnsStatus::Io,
        _ => VnsStatus::InvalidArgument,
    }
}

fn fail(status: VnsStatus, msg: impl Into<String>) -> VnsStatus {
    set_error(msg);
    status
}

/// Runs `f`, recording its error and catching panics.
fn guard<F: FnOnce() -> Result<VnsStatus, VnsStatus>>(f: F) -> VnsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) | Ok(Err(s)) => s,
        Err(_) => fail(VnsStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: vnsgm::Result<T>) -> Result<T, VnsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, VnsStatus> {
    if p.is_null() {
        return Err(fail(VnsStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(VnsStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, VnsStatus> {
    p.as_ref().ok_or_else(|| fail(VnsStatus::NullPointer, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), VnsStatus> {
    if p.is_null() {
        Err(fail(VnsStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn hops(v: u32) -> Hops {
    if v == VNS_HOPS_INFINITE {
        Hops::Infinite
    } else {
        Hops::Finite(v)
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next `vns_*` call on the same thread.
#[no_mangle]
pub extern "C" fn vns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn vns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default nomination parameters (h = ℓ = 2, 100 restarts, γ = 0.1).
#[no_mangle]
pub extern "C" fn vns_config_default() -> VnsConfig {
    let d = VnConfig::default();
    VnsConfig {
        h: 2,
        ell: 2,
        restarts: d.soft.restarts,
        gamma: d.soft.gamma,
        eps: d.soft.eps,
        max_iter: d.soft.max_iter,
        rng_seed: d.soft.rng_seed,
    }
}

/// Parses an edge list held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn vns_graph_parse(text: *const c_char, out: *mut *mut VnsGraph) -> VnsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let g = lib(load_edge_list(text.as_bytes()))?.graph;
        *out = Box::into_raw(Box::new(VnsGraph(g)));
        Ok(VnsStatus::Ok)
    })
}

/// Reads an edge list file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn vns_graph_load(path: *const c_char, out: *mut *mut VnsGraph) -> VnsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let file = std::fs::File::open(path).map_err(|e| fail(VnsStatus::Io, format!("{path}: {e}")))?;
        let g = lib(load_edge_list(BufReader::new(file)))?.graph;
        *out = Box::into_raw(Box::new(VnsGraph(g)));
        Ok(VnsStatus::Ok)
    })
}

/// # Safety
/// `g` must be null or a pointer from `vns_graph_parse`/`vns_graph_load`.
#[no_mangle]
pub unsafe extern "C" fn vns_graph_free(g: *mut VnsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, 0 for null.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn vns_graph_vertex_count(g: *const VnsGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n_vertices())
}

/// Edge count, 0 for null.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn vns_graph_edge_count(g: *const VnsGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n_edges())
}

/// An empty seed map.
#[no_mangle]
pub extern "C" fn vns_seeds_new() -> *mut VnsSeedMap {
    Box::into_raw(Box::new(VnsSeedMap(Vec::new())))
}

/// Adds one seed pair. Repeating a label on either side is an error.
///
/// # Safety
/// `seeds` must be a live seed map; `a` and `b` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn vns_seeds_add(seeds: *mut VnsSeedMap, a: *const c_char, b: *const c_char) -> VnsStatus {
    guard(|| {
        let map = seeds.as_mut().ok_or_else(|| fail(VnsStatus::NullPointer, "seeds is null"))?;
        let (a, b) = (str_arg(a, "a")?, str_arg(b, "b")?);
        let mut pairs = map.0.clone();
        pairs.push((a.to_owned(), b.to_owned()));
        lib(SeedMap::new(pairs.clone()))?;
        map.0 = pairs;
        Ok(VnsStatus::Ok)
    })
}

/// # Safety
/// `seeds` must be a live seed map or null.
#[no_mangle]
pub unsafe extern "C" fn vns_seeds_len(seeds: *const VnsSeedMap) -> usize {
    seeds.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `seeds` must be null or a pointer from `vns_seeds_new`.
#[no_mangle]
pub unsafe extern "C" fn vns_seeds_free(seeds: *mut VnsSeedMap) {
    if !seeds.is_null() {
        drop(Box::from_raw(seeds));
    }
}

/// Ranks `g2`'s vertices as counterparts of `voi`. On `Ok` or
/// `NoLocalSeeds` a handle is written to `out`.
///
/// # Safety
/// All handles must be live, `voi` NUL-terminated, `cfg` and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn vns_nominate(
    g: *const VnsGraph,
    g2: *const VnsGraph,
    seeds: *const VnsSeedMap,
    voi: *const c_char,
    cfg: *const VnsConfig,
    out: *mut *mut VnsNomination,
) -> VnsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let (g, g2) = (ref_arg(g, "g")?, ref_arg(g2, "g2")?);
        let seeds = lib(SeedMap::new(ref_arg(seeds, "seeds")?.0.clone()))?;
        let voi = str_arg(voi, "voi")?;
        let c = ref_arg(cfg, "cfg")?;
        let cfg = VnConfig {
            h: hops(c.h),
            ell: hops(c.ell),
            soft: SoftSgmConfig {
                restarts: c.restarts,
                gamma: c.gamma,
                eps: c.eps,
                max_iter: c.max_iter,
                rng_seed: c.rng_seed,
            },
        };
        let inner = lib(nominate(&g.0, &g2.0, &seeds, voi, &cfg))?;
        let labels = inner
            .list()
            .map(|l| l.candidates.iter().map(|c| CString::new(c.label.as_str()).unwrap_or_default()).collect())
            .unwrap_or_default();
        let status = match inner {
            Nomination::Nominated(_) => VnsStatus::Ok,
            Nomination::NoLocalSeeds { .. } => {
                set_error(format!("no seed within {} hops of {voi}", cfg.h));
                VnsStatus::NoLocalSeeds
            }
        };
        *out = Box::into_raw(Box::new(VnsNomination { inner, labels }));
        Ok(status)
    })
}

/// Number of ranked candidates (0 after a stop).
///
/// # Safety
/// `n` must be null or a live nomination handle.
#[no_mangle]
pub unsafe extern "C" fn vns_nomination_len(n: *const VnsNomination) -> usize {
    n.as_ref().map_or(0, |n| n.labels.len())
}

/// Candidate at 0-based position `i`. The label stays valid while the
/// nomination handle is alive.
///
/// # Safety
/// `n` must be a live handle; `label` and `score` writable pointers.
#[no_mangle]
pub unsafe extern "C" fn vns_nomination_get(
    n: *const VnsNomination,
    i: usize,
    label: *mut *const c_char,
    score: *mut f64,
) -> VnsStatus {
    guard(|| {
        let n = ref_arg(n, "nomination")?;
        out_arg(label, "label")?;
        out_arg(score, "score")?;
        let list = n.inner.list().ok_or_else(|| fail(VnsStatus::NotFound, "nomination stopped"))?;
        let c = list
            .candidates
            .get(i)
            .ok_or_else(|| fail(VnsStatus::InvalidArgument, format!("index {i} out of range")))?;
        *label = n.labels[i].as_ptr();
        *score = c.score;
        Ok(VnsStatus::Ok)
    })
}

/// Normalized rank of `truth` in the list. `NotFound` when it is not a
/// candidate or the nomination stopped.
///
/// # Safety
/// `n` must be a live handle, `truth` NUL-terminated, `tau` writable.
#[no_mangle]
pub unsafe extern "C" fn vns_nomination_tau(n: *const VnsNomination, truth: *const c_char, tau: *mut f64) -> VnsStatus {
    guard(|| {
        let n = ref_arg(n, "nomination")?;
        let truth = str_arg(truth, "truth")?;
        out_arg(tau, "tau")?;
        let list = n.inner.list().ok_or_else(|| fail(VnsStatus::NotFound, "nomination stopped"))?;
        match evaluate_tau(list, truth).tau {
            Some(t) => {
                *tau = t;
                Ok(VnsStatus::Ok)
            }
            None => Err(fail(VnsStatus::NotFound, format!("`{truth}` is not a candidate"))),
        }
    })
}

/// The full nomination as JSON; free with [`vns_string_free`].
///
/// # Safety
/// `n` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vns_nomination_json(n: *const VnsNomination, out: *mut *mut c_char) -> VnsStatus {
    guard(|| {
        let n = ref_arg(n, "nomination")?;
        out_arg(out, "out")?;
        let s = lib(serde_json::to_string(&n.inner).map_err(Error::from))?;
        *out = into_c_string(s);
        Ok(VnsStatus::Ok)
    })
}

/// # Safety
/// `n` must be null or a pointer from `vns_nominate`.
#[no_mangle]
pub unsafe extern "C" fn vns_nomination_free(n: *mut VnsNomination) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn vns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Maximum-weight assignment of a row-major `k × k` matrix. Writes the
/// column of each row to `perm` (length `k`) and the total to `objective`.
///
/// # Safety
/// `m` must point to `k * k` doubles, `perm` to `k` writable `size_t`s.
#[no_mangle]
pub unsafe extern "C" fn vns_max_assignment(m: *const f64, k: usize, perm: *mut usize, objective: *mut f64) -> VnsStatus {
    guard(|| {
        if m.is_null() || perm.is_null() || objective.is_null() {
            return Err(fail(VnsStatus::NullPointer, "null argument"));
        }
        let len = k.checked_mul(k).ok_or_else(|| fail(VnsStatus::InvalidArgument, "k too large"))?;
        let data = std::slice::from_raw_parts(m, len);
        let view = ArrayView2::from_shape((k, k), data).map_err(|e| fail(VnsStatus::InvalidArgument, e.to_string()))?;
        let r = lib(max_assignment(view))?;
        std::slice::from_raw_parts_mut(perm, k).copy_from_slice(&r.permutation);
        *objective = r.objective;
        Ok(VnsStatus::Ok)
    })
}
