//! C ABI for the causal-twin library.
//!
//! Conventions:
//! - Handles (`CtGraph`, `CtTwin`) are opaque; free them with the matching
//!   `ct_*_free`. Strings returned through out-parameters are owned by the
//!   caller and must be released with `ct_string_free`.
//! - Every fallible call returns a [`CtStatus`]; on failure,
//!   [`ct_last_error`] returns a message for the current thread, valid until
//!   the next failing call on that thread.
//! - All input strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use causal_twin::cpt::{self, CptRowsJson};
use causal_twin::docalc::{
    interventional_marginal, rule1_applies, rule2_applies, rule3_applies, RuleQuery,
};
use causal_twin::graph::{CausalGraph, GraphSpec, Intervention};
use causal_twin::infer::posterior_predictive;
use causal_twin::twin::{causal_bayes_construct, export_dot, TwinPgm};
use causal_twin::Dataset;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CtStatus {
    /// Success.
    CtOk = 0,
    /// The inputs parse but violate a model invariant.
    CtDomainError = 1,
    /// The inputs could not be parsed.
    CtParseError = 2,
    /// A required pointer argument was NULL.
    CtNullPointer = 3,
    /// An input string was not valid UTF-8.
    CtUtf8Error = 4,
    /// An output buffer had the wrong length.
    CtBadLength = 5,
}

/// Opaque validated graph handle.
pub struct CtGraph {
    inner: CausalGraph,
}

/// Opaque twin-model handle.
pub struct CtTwin {
    inner: TwinPgm,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(status: CtStatus, msg: &str) -> CtStatus {
    set_error(msg);
    status
}

/// Message for the last failure on this thread. Never NULL; empty when no
/// failure has been recorded. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guarded(body: impl FnOnce() -> CtStatus) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(CtStatus::CtDomainError, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be NULL or a NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, CtStatus> {
    if ptr.is_null() {
        return Err(CtStatus::CtNullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| CtStatus::CtUtf8Error)
}

fn give_string(text: String, out: *mut *mut c_char) -> CtStatus {
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            CtStatus::CtOk
        }
        Err(_) => fail(CtStatus::CtDomainError, "output contains NUL"),
    }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `ct_*` function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn ct_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parse and validate a graph from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_from_json(
    json: *const c_char,
    out: *mut *mut CtGraph,
) -> CtStatus {
    if out.is_null() {
        return fail(CtStatus::CtNullPointer, "out is NULL");
    }
    let text = match unsafe { utf8_arg(json) } {
        Ok(t) => t,
        Err(s) => return fail(s, "json argument"),
    };
    guarded(|| {
        let spec = match GraphSpec::from_json(text) {
            Ok(spec) => spec,
            Err(e) => return fail(CtStatus::CtParseError, &e.to_string()),
        };
        match CausalGraph::build(&spec) {
            Ok(graph) => {
                unsafe { *out = Box::into_raw(Box::new(CtGraph { inner: graph })) };
                CtStatus::CtOk
            }
            Err(e) => fail(CtStatus::CtDomainError, &e.to_string()),
        }
    })
}

/// # Safety
/// `g` must be NULL or a live graph handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_free(g: *mut CtGraph) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Number of nodes; 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_node_count(g: *const CtGraph) -> usize {
    if g.is_null() {
        return 0;
    }
    unsafe { &*g }.inner.len()
}

/// Cardinality of a named node.
///
/// # Safety
/// Pointer arguments must be valid; `name` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_cardinality(
    g: *const CtGraph,
    name: *const c_char,
    out: *mut u32,
) -> CtStatus {
    if g.is_null() || out.is_null() {
        return fail(CtStatus::CtNullPointer, "graph or out is NULL");
    }
    let name = match unsafe { utf8_arg(name) } {
        Ok(n) => n,
        Err(s) => return fail(s, "name argument"),
    };
    match unsafe { &*g }.inner.cardinality_of(name) {
        Ok(card) => {
            unsafe { *out = card as u32 };
            CtStatus::CtOk
        }
        Err(e) => fail(CtStatus::CtDomainError, &e.to_string()),
    }
}

/// Build the twin model for do(target = value).
///
/// # Safety
/// Pointer arguments must be valid; `target` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ct_twin_build(
    g: *const CtGraph,
    target: *const c_char,
    value: u32,
    out: *mut *mut CtTwin,
) -> CtStatus {
    if g.is_null() || out.is_null() {
        return fail(CtStatus::CtNullPointer, "graph or out is NULL");
    }
    let target = match unsafe { utf8_arg(target) } {
        Ok(t) => t,
        Err(s) => return fail(s, "target argument"),
    };
    let graph = &unsafe { &*g }.inner;
    guarded(|| {
        match causal_bayes_construct(graph, &Intervention::new(target, value as usize)) {
            Ok(twin) => {
                unsafe { *out = Box::into_raw(Box::new(CtTwin { inner: twin })) };
                CtStatus::CtOk
            }
            Err(e) => fail(CtStatus::CtDomainError, &e.to_string()),
        }
    })
}

/// # Safety
/// `tw` must be NULL or a live twin handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ct_twin_free(tw: *mut CtTwin) {
    if !tw.is_null() {
        drop(unsafe { Box::from_raw(tw) });
    }
}

/// Graphviz DOT text for a twin model.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_twin_to_dot(tw: *const CtTwin, out: *mut *mut c_char) -> CtStatus {
    if tw.is_null() || out.is_null() {
        return fail(CtStatus::CtNullPointer, "twin or out is NULL");
    }
    give_string(export_dot(&unsafe { &*tw }.inner), out)
}

/// JSON rendering of a twin model.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_twin_to_json(tw: *const CtTwin, out: *mut *mut c_char) -> CtStatus {
    if tw.is_null() || out.is_null() {
        return fail(CtStatus::CtNullPointer, "twin or out is NULL");
    }
    match serde_json::to_string_pretty(&unsafe { &*tw }.inner) {
        Ok(text) => give_string(text, out),
        Err(e) => fail(CtStatus::CtDomainError, &e.to_string()),
    }
}

fn split_csv_names(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Evaluate rules 1-3 for P(y | do(t), z [, w]).
///
/// `y_csv`, `z_csv`, `w_csv` are comma-separated node lists; `z_csv` and
/// `w_csv` may be NULL or empty. Writes three flags into `out_rules`:
/// 1 applies, 0 does not, -1 not evaluated (rule 1 without a W set).
///
/// # Safety
/// `out_rules` must point to at least 3 writable ints.
#[no_mangle]
pub unsafe extern "C" fn ct_rules_apply(
    g: *const CtGraph,
    y_csv: *const c_char,
    target: *const c_char,
    z_csv: *const c_char,
    w_csv: *const c_char,
    out_rules: *mut c_int,
) -> CtStatus {
    if g.is_null() || out_rules.is_null() {
        return fail(CtStatus::CtNullPointer, "graph or out_rules is NULL");
    }
    let y = match unsafe { utf8_arg(y_csv) } {
        Ok(t) => split_csv_names(t),
        Err(s) => return fail(s, "y argument"),
    };
    let target = match unsafe { utf8_arg(target) } {
        Ok(t) => t.to_owned(),
        Err(s) => return fail(s, "target argument"),
    };
    let opt = |ptr: *const c_char| -> Result<Vec<String>, CtStatus> {
        if ptr.is_null() {
            Ok(Vec::new())
        } else {
            unsafe { utf8_arg(ptr) }.map(split_csv_names)
        }
    };
    let z = match opt(z_csv) {
        Ok(v) => v,
        Err(s) => return fail(s, "z argument"),
    };
    let w = match opt(w_csv) {
        Ok(v) => v,
        Err(s) => return fail(s, "w argument"),
    };
    let graph = &unsafe { &*g }.inner;
    let query = RuleQuery { y, t: target, z, w };
    guarded(|| {
        let r1 = if query.w.is_empty() {
            -1
        } else {
            match rule1_applies(graph, &query) {
                Ok(b) => c_int::from(b),
                Err(e) => return fail(CtStatus::CtDomainError, &e.to_string()),
            }
        };
        let r2 = match rule2_applies(graph, &query) {
            Ok(b) => c_int::from(b),
            Err(e) => return fail(CtStatus::CtDomainError, &e.to_string()),
        };
        let r3 = match rule3_applies(graph, &query) {
            Ok(b) => c_int::from(b),
            Err(e) => return fail(CtStatus::CtDomainError, &e.to_string()),
        };
        unsafe {
            *out_rules = r1;
            *out_rules.add(1) = r2;
            *out_rules.add(2) = r3;
        }
        CtStatus::CtOk
    })
}

/// Ground-truth interventional marginal P(y | do(target=value)) from a CPT
/// JSON map. `out_probs` must hold exactly `cardinality(y)` doubles.
///
/// # Safety
/// Pointer arguments must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ct_interventional_marginal(
    g: *const CtGraph,
    cpts_json: *const c_char,
    target: *const c_char,
    value: u32,
    y: *const c_char,
    out_probs: *mut f64,
    out_len: usize,
) -> CtStatus {
    if g.is_null() || out_probs.is_null() {
        return fail(CtStatus::CtNullPointer, "graph or out_probs is NULL");
    }
    let (cpts_text, target, y) = match (
        unsafe { utf8_arg(cpts_json) },
        unsafe { utf8_arg(target) },
        unsafe { utf8_arg(y) },
    ) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return fail(s, "string argument"),
    };
    let graph = &unsafe { &*g }.inner;
    guarded(|| {
        let rows: CptRowsJson = match serde_json::from_str(cpts_text) {
            Ok(r) => r,
            Err(e) => return fail(CtStatus::CtParseError, &e.to_string()),
        };
        let cpts = match cpt::tables_from_json(graph, &rows) {
            Ok(c) => c,
            Err(e) => return fail(CtStatus::CtDomainError, &e.to_string()),
        };
        let dist = match interventional_marginal(
            graph,
            &cpts,
            &Intervention::new(target, value as usize),
            y,
        ) {
            Ok(d) => d,
            Err(e) => return fail(CtStatus::CtDomainError, &e.to_string()),
        };
        if dist.table().len() != out_len {
            return fail(
                CtStatus::CtBadLength,
                &format!("need {} slots, got {out_len}", dist.table().len()),
            );
        }
        unsafe { std::ptr::copy_nonoverlapping(dist.table().as_ptr(), out_probs, out_len) };
        CtStatus::CtOk
    })
}

/// Exact Bayesian posterior predictive P(y* | data, do(target=value)) for a
/// fully observed graph. `data_csv` is the dataset text (header row of
/// variable names); `priors_json` may be NULL for a flat prior with one
/// pseudo-count per cell. `out_probs` must hold `cardinality(y)` doubles.
///
/// # Safety
/// Pointer arguments must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ct_posterior_predictive(
    g: *const CtGraph,
    data_csv: *const c_char,
    priors_json: *const c_char,
    target: *const c_char,
    value: u32,
    y: *const c_char,
    out_probs: *mut f64,
    out_len: usize,
) -> CtStatus {
    if g.is_null() || out_probs.is_null() {
        return fail(CtStatus::CtNullPointer, "graph or out_probs is NULL");
    }
    let (data_text, target, y) = match (
        unsafe { utf8_arg(data_csv) },
        unsafe { utf8_arg(target) },
        unsafe { utf8_arg(y) },
    ) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return fail(s, "string argument"),
    };
    let graph = &unsafe { &*g }.inner;
    let priors_text = if priors_json.is_null() {
        None
    } else {
        match unsafe { utf8_arg(priors_json) } {
            Ok(t) => Some(t),
            Err(s) => return fail(s, "priors argument"),
        }
    };
    guarded(|| {
        let data = match Dataset::from_csv_str(data_text) {
            Ok(d) => d,
            Err(e) => return fail(CtStatus::CtParseError, &e.to_string()),
        };
        let priors = match priors_text {
            None => match cpt::flat_priors(graph, 1.0) {
                Ok(p) => p,
                Err(e) => return fail(CtStatus::CtDomainError, &e.to_string()),
            },
            Some(text) => {
                let rows: CptRowsJson = match serde_json::from_str(text) {
                    Ok(r) => r,
                    Err(e) => return fail(CtStatus::CtParseError, &e.to_string()),
                };
                match cpt::priors_from_json(graph, &rows) {
                    Ok(p) => p,
                    Err(e) => return fail(CtStatus::CtDomainError, &e.to_string()),
                }
            }
        };
        let dist = match posterior_predictive(
            graph,
            &data,
            &priors,
            &Intervention::new(target, value as usize),
            y,
        ) {
            Ok(d) => d,
            Err(e) => return fail(CtStatus::CtDomainError, &e.to_string()),
        };
        if dist.table().len() != out_len {
            return fail(
                CtStatus::CtBadLength,
                &format!("need {} slots, got {out_len}", dist.table().len()),
            );
        }
        unsafe { std::ptr::copy_nonoverlapping(dist.table().as_ptr(), out_probs, out_len) };
        CtStatus::CtOk
    })
}
