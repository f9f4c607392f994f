//! C ABI for conicroute.
//!
//! Graphs cross the boundary as opaque `ConicGraphHandle` pointers created by
//! `conic_graph_from_csv` and released with `conic_graph_free`. Every fallible
//! call returns a `ConicStatus`; on failure a message is available from
//! `conic_last_error_message` on the same thread. Panics never unwind into C,
//! they surface as `CONIC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use conicroute::io::{export_dot, parse_build_matrix, to_graph, QueryEngine, QueryError, QueryOptions};
use conicroute::{
    absolute_edge_difference, build_hierarchy, fitness, invent_for_source, shortest_paths, ConicGraph, HiddenPath, InventedEdge, NodeId,
    PolicyThreshold, Tolerance,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    UnknownLabel = 5,
    UnknownNode = 6,
    NotASource = 7,
    Unreachable = 8,
    InvalidArgument = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Opaque graph handle. Immutable once created, so one handle may be used
/// from several threads at once.
pub struct ConicGraphHandle {
    graph: ConicGraph,
    labels: Vec<CString>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConicRoute {
    pub destination: u32,
    pub distance: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConicInventedEdge {
    pub source: u32,
    pub from: u32,
    pub to: u32,
    pub weight: u64,
    pub min_weight: u64,
    pub max_weight: u64,
}

impl From<InventedEdge> for ConicInventedEdge {
    fn from(e: InventedEdge) -> Self {
        ConicInventedEdge {
            source: e.source.0,
            from: e.from.0,
            to: e.to.0,
            weight: e.weight,
            min_weight: e.pair_weights.0,
            max_weight: e.pair_weights.1,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConicFitness {
    pub invented_weight: u64,
    pub hidden_weight: u64,
    pub absolute_error: u64,
    /// Relative error as a reduced fraction.
    pub relative_error_numer: u64,
    pub relative_error_denom: u64,
    pub fit: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl ToString) {
    let text = CString::new(message.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn fail(status: ConicStatus, message: impl ToString) -> ConicStatus {
    set_error(message);
    status
}

fn guard<F: FnOnce() -> ConicStatus>(f: F) -> ConicStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(ConicStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, ConicStatus> {
    if p.is_null() {
        return Err(fail(ConicStatus::NullPointer, "null string argument"));
    }
    // SAFETY: caller passes a valid NUL-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| fail(ConicStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn handle<'a>(p: *const ConicGraphHandle) -> Result<&'a ConicGraphHandle, ConicStatus> {
    // SAFETY: non-null handles come from conic_graph_from_csv and are alive.
    unsafe { p.as_ref() }.ok_or_else(|| fail(ConicStatus::NullPointer, "null graph handle"))
}

fn node(h: &ConicGraphHandle, id: u32) -> Result<NodeId, ConicStatus> {
    let n = NodeId(id);
    if h.graph.contains(n) {
        Ok(n)
    } else {
        Err(fail(ConicStatus::UnknownNode, format!("unknown node {id}")))
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn conic_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a build-matrix CSV and stores a new handle in `*out`.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conic_graph_from_csv(csv: *const c_char, out: *mut *mut ConicGraphHandle) -> ConicStatus {
    guard(|| {
        if out.is_null() {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        let text = tri!(unsafe { read_str(csv) });
        let matrix = match parse_build_matrix(text) {
            Ok(m) => m,
            Err(e) => return fail(ConicStatus::ParseError, e),
        };
        let graph = match to_graph(&matrix) {
            Ok(g) => g,
            Err(report) => return fail(ConicStatus::ValidationError, report),
        };
        let labels = graph.nodes().iter().map(|n| CString::new(n.label.as_str()).unwrap_or_default()).collect();
        let boxed = Box::new(ConicGraphHandle { graph, labels });
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(boxed) };
        ConicStatus::Ok
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `graph` must come from `conic_graph_from_csv` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn conic_graph_free(graph: *mut ConicGraphHandle) {
    if !graph.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// # Safety
/// `graph` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn conic_graph_node_count(graph: *const ConicGraphHandle) -> usize {
    unsafe { graph.as_ref() }.map_or(0, |h| h.graph.node_count())
}

/// # Safety
/// `graph` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn conic_graph_edge_count(graph: *const ConicGraphHandle) -> usize {
    unsafe { graph.as_ref() }.map_or(0, |h| h.graph.edge_count())
}

/// Label of node `id`, or NULL. Owned by the handle.
///
/// # Safety
/// `graph` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn conic_graph_node_label(graph: *const ConicGraphHandle, id: u32) -> *const c_char {
    unsafe { graph.as_ref() }.and_then(|h| h.labels.get(id as usize)).map_or(ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `graph` must be a live handle, `label` a NUL-terminated string and
/// `out_id` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conic_graph_node_id(
    graph: *const ConicGraphHandle,
    label: *const c_char,
    out_id: *mut u32,
) -> ConicStatus {
    guard(|| {
        let h = tri!(unsafe { handle(graph) });
        let label = tri!(unsafe { read_str(label) });
        if out_id.is_null() {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        match h.graph.node_by_label(label) {
            Some(id) => {
                unsafe { *out_id = id.0 };
                ConicStatus::Ok
            }
            None => fail(ConicStatus::UnknownLabel, format!("unknown label {label:?}")),
        }
    })
}

/// Shortest distance between two nodes over original edges.
///
/// # Safety
/// `graph` must be a live handle and `out_distance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conic_shortest_distance(
    graph: *const ConicGraphHandle,
    from: u32,
    to: u32,
    out_distance: *mut u64,
) -> ConicStatus {
    guard(|| {
        let h = tri!(unsafe { handle(graph) });
        let (from, to) = (tri!(node(h, from)), tri!(node(h, to)));
        if out_distance.is_null() {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        let state = match shortest_paths(&h.graph, from, false) {
            Ok(s) => s,
            Err(e) => return fail(ConicStatus::InvalidArgument, e),
        };
        match state.distance(to) {
            Some(d) => {
                unsafe { *out_distance = d };
                ConicStatus::Ok
            }
            None => fail(ConicStatus::Unreachable, format!("{to} is unreachable")),
        }
    })
}

/// Nearest destination from the source called `source_label`. With
/// `use_invented` the search may traverse invented edges.
///
/// # Safety
/// `graph` must be a live handle, `source_label` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conic_nearest_destination(
    graph: *const ConicGraphHandle,
    source_label: *const c_char,
    use_invented: bool,
    out: *mut ConicRoute,
) -> ConicStatus {
    guard(|| {
        let h = tri!(unsafe { handle(graph) });
        let label = tri!(unsafe { read_str(source_label) });
        if out.is_null() {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        let options = QueryOptions { invent: false, use_invented, ..Default::default() };
        let result = QueryEngine::new(&h.graph, options).and_then(|engine| engine.query(label));
        match result {
            Ok(r) => {
                let destination = h.graph.node_by_label(&r.best.destination).map_or(u32::MAX, |n| n.0);
                unsafe { *out = ConicRoute { destination, distance: r.best.distance } };
                ConicStatus::Ok
            }
            Err(e @ QueryError::UnknownSourceLabel(_)) => fail(ConicStatus::UnknownLabel, e),
            Err(e @ QueryError::NotASource(_)) => fail(ConicStatus::NotASource, e),
            Err(e @ QueryError::NoReachableDestination(_)) => fail(ConicStatus::Unreachable, e),
            Err(e) => fail(ConicStatus::InvalidArgument, e),
        }
    })
}

/// Invents edges for source `source`. `allowable == 0` disables the weight
/// cap. `*out_len` always receives the number of invented edges; if it
/// exceeds `capacity` nothing is written and `CONIC_STATUS_BUFFER_TOO_SMALL`
/// is returned. `out` may be NULL when `capacity` is 0.
///
/// # Safety
/// `graph` must be a live handle, `out` must point to `capacity` writable
/// elements and `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn conic_invent_for_source(
    graph: *const ConicGraphHandle,
    source: u32,
    allowable: u64,
    out: *mut ConicInventedEdge,
    capacity: usize,
    out_len: *mut usize,
) -> ConicStatus {
    guard(|| {
        let h = tri!(unsafe { handle(graph) });
        let source = tri!(node(h, source));
        if out_len.is_null() || (out.is_null() && capacity > 0) {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        let policy = PolicyThreshold::new(allowable).ok();
        let edges = match invent_for_source(&h.graph, source, policy) {
            Ok(edges) => edges,
            Err(e) => return fail(ConicStatus::NotASource, e),
        };
        unsafe { *out_len = edges.len() };
        if edges.len() > capacity {
            return fail(ConicStatus::BufferTooSmall, format!("need room for {} edges", edges.len()));
        }
        for (i, e) in edges.into_iter().enumerate() {
            // SAFETY: i < len <= capacity.
            unsafe { *out.add(i) = e.into() };
        }
        ConicStatus::Ok
    })
}

/// `|w1 - w2|` for positive weights.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conic_absolute_edge_difference(w1: u64, w2: u64, out: *mut u64) -> ConicStatus {
    guard(|| {
        if out.is_null() {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        match absolute_edge_difference(w1, w2) {
            Ok(d) => {
                unsafe { *out = d };
                ConicStatus::Ok
            }
            Err(e) => fail(ConicStatus::InvalidArgument, e),
        }
    })
}

/// Scores an invented weight against a hidden path weight with tolerance
/// `tolerance_numer / tolerance_denom`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conic_fitness(
    invented_weight: u64,
    hidden_weight: u64,
    tolerance_numer: u64,
    tolerance_denom: u64,
    out: *mut ConicFitness,
) -> ConicStatus {
    guard(|| {
        if out.is_null() {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        if tolerance_denom == 0 {
            return fail(ConicStatus::InvalidArgument, "tolerance denominator is zero");
        }
        let (a, b) = (NodeId(0), NodeId(1));
        let edge = InventedEdge { source: a, from: a, to: b, weight: invented_weight, pair_weights: (0, invented_weight) };
        let hidden = HiddenPath { from: a, to: b, true_weight: hidden_weight };
        let tolerance = Tolerance(num_rational::Ratio::new(tolerance_numer, tolerance_denom));
        match fitness(&edge, &hidden, tolerance) {
            Ok(r) => {
                unsafe {
                    *out = ConicFitness {
                        invented_weight: r.invented_weight,
                        hidden_weight: r.hidden_weight,
                        absolute_error: r.absolute_error,
                        relative_error_numer: *r.relative_error.numer(),
                        relative_error_denom: *r.relative_error.denom(),
                        fit: r.fit,
                    }
                };
                ConicStatus::Ok
            }
            Err(e) => fail(ConicStatus::InvalidArgument, e),
        }
    })
}

/// Contracts every node in id order and reports the number of shortcuts.
///
/// # Safety
/// `graph` must be a live handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conic_shortcut_count(graph: *const ConicGraphHandle, out_count: *mut usize) -> ConicStatus {
    guard(|| {
        let h = tri!(unsafe { handle(graph) });
        if out_count.is_null() {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        match build_hierarchy(&h.graph, None) {
            Ok(o) => {
                unsafe { *out_count = o.shortcuts.len() };
                ConicStatus::Ok
            }
            Err(e) => fail(ConicStatus::InvalidArgument, e),
        }
    })
}

/// DOT rendering of the graph, optionally with invented edges. Free the
/// string with `conic_string_free`.
///
/// # Safety
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conic_export_dot(
    graph: *const ConicGraphHandle,
    with_invented: bool,
    out: *mut *mut c_char,
) -> ConicStatus {
    guard(|| {
        let h = tri!(unsafe { handle(graph) });
        if out.is_null() {
            return fail(ConicStatus::NullPointer, "null output pointer");
        }
        let invented: Option<Vec<InventedEdge>> = if with_invented {
            match conicroute::invent_all(&h.graph, None) {
                Ok(all) => Some(all.into_values().flatten().collect()),
                Err(e) => return fail(ConicStatus::InvalidArgument, e),
            }
        } else {
            None
        };
        let text = export_dot(&h.graph, None, invented.as_deref());
        match CString::new(text) {
            Ok(s) => {
                unsafe { *out = s.into_raw() };
                ConicStatus::Ok
            }
            Err(e) => fail(ConicStatus::InvalidArgument, e),
        }
    })
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn conic_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}
