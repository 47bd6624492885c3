//! C ABI over the qaprobe workbench.
//!
//! Objects cross the boundary as opaque handles created by `qp_*_new`/`load`
//! functions and released with the matching `qp_*_free`. Every fallible call
//! returns a [`QpStatus`]; on failure [`qp_last_error_message`] describes the
//! most recent error on the calling thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::OnceLock;
use std::time::Duration;

use qaprobe::anneal::SelectionMode;
use qaprobe::chimera::{embed_ising, utc_chain_strength, Embedding};
use qaprobe::features::{extract_features, Features, FEATURE_NAMES, NUM_FEATURES};
use qaprobe::graph::{sample_erdos_renyi, GraphRecord};
use qaprobe::oracle::max_clique_with_deadline;
use qaprobe::pipeline::{
    default_embedding, read_json, solve_one, Model, ModelDocument, Regime, SolveConfig, QUBO_A,
    QUBO_B,
};
use qaprobe::qubo::build_max_clique_qubo;
use qaprobe::{Error, Graph};

/// Result of every fallible call. Values 2 to 5 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InputError = 3,
    Timeout = 4,
    Integrity = 5,
    Panic = 6,
}

impl From<&Error> for QpStatus {
    fn from(e: &Error) -> Self {
        match e.exit_code() {
            2 => QpStatus::InvalidArgument,
            4 => QpStatus::Timeout,
            5 => QpStatus::Integrity,
            _ => QpStatus::InputError,
        }
    }
}

/// Opaque graph handle.
pub struct QpGraph(Graph);

/// Opaque embedding handle.
pub struct QpEmbedding(Embedding);

/// Opaque handle for a trained decision tree or boosted regressor.
pub struct QpModel(ModelDocument);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpModelKind {
    DecisionTree = 0,
    GradientBoost = 1,
}

/// Outcome of annealing one instance.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QpSolveResult {
    pub best_clique_size: usize,
    pub exact_clique_size: usize,
    pub reads_with_valid_clique: usize,
    pub chain_strength: f64,
    pub min_energy: f64,
    pub broken_chain_rate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), QpStatus>) -> QpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QpStatus::Ok,
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            QpStatus::Panic
        }
    }
}

fn fail(e: Error) -> QpStatus {
    let status = QpStatus::from(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> QpStatus {
    set_error(format!("{what} is null"));
    QpStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, QpStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), QpStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, QpStatus> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(Error::InvalidArgument("path is not valid UTF-8".into())))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next qaprobe call on the same thread.
#[no_mangle]
pub extern "C" fn qp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qp_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).expect("no NUL"))
        .as_ptr()
}

#[no_mangle]
pub extern "C" fn qp_num_features() -> usize {
    NUM_FEATURES
}

/// Canonical name of feature `index`, or NULL when out of range. Static storage.
#[no_mangle]
pub extern "C" fn qp_feature_name(index: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| {
        FEATURE_NAMES
            .iter()
            .map(|n| CString::new(*n).expect("no NUL"))
            .collect()
    });
    names.get(index).map_or(ptr::null(), |c| c.as_ptr())
}

// ------------------------------------------------------------------ graphs

/// Builds a graph from `num_edges` vertex pairs stored flat in `edges`.
///
/// # Safety
/// `edges` must point to `2 * num_edges` readable values (or be NULL when
/// `num_edges` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_graph_new(
    n: usize,
    edges: *const usize,
    num_edges: usize,
    out: *mut *mut QpGraph,
) -> QpStatus {
    guard(|| {
        let flat: &[usize] = if num_edges == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * num_edges)
        };
        let g = Graph::from_edges(n, flat.chunks_exact(2).map(|e| (e[0], e[1]))).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(QpGraph(g))), "out")
    })
}

/// Samples `G(n, p)` without isolated vertices.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_graph_sample(
    n: usize,
    p: f64,
    seed: u64,
    out: *mut *mut QpGraph,
) -> QpStatus {
    guard(|| {
        let g = sample_erdos_renyi(n, p, seed).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(QpGraph(g))), "out")
    })
}

/// # Safety
/// `g` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qp_graph_num_vertices(g: *const QpGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_vertices())
}

/// # Safety
/// `g` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qp_graph_num_edges(g: *const QpGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_edges())
}

/// # Safety
/// `g` must come from a `qp_graph_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qp_graph_free(g: *mut QpGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Exact maximum clique size; fails with `Timeout` past `deadline_secs`.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_max_clique_size(
    g: *const QpGraph,
    deadline_secs: f64,
    out: *mut usize,
) -> QpStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        if !(deadline_secs > 0.0 && deadline_secs.is_finite()) {
            return Err(fail(Error::InvalidArgument(
                "deadline must be positive".into(),
            )));
        }
        let clique =
            max_clique_with_deadline(&g.0, Duration::from_secs_f64(deadline_secs)).map_err(fail)?;
        write_out(out, clique.len(), "out")
    })
}

// ------------------------------------------------------------------ embeddings

/// Staircase clique embedding on the `m × m` Chimera grid (`4m` chains).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_embedding_staircase(m: usize, out: *mut *mut QpEmbedding) -> QpStatus {
    guard(|| {
        let emb = default_embedding(m).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(QpEmbedding(emb))), "out")
    })
}

/// Loads and validates an embedding file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_embedding_load(
    path: *const c_char,
    out: *mut *mut QpEmbedding,
) -> QpStatus {
    guard(|| {
        let emb = Embedding::load(path_arg(path)?).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(QpEmbedding(emb))), "out")
    })
}

/// Number of chains, the largest embeddable clique.
///
/// # Safety
/// `e` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qp_embedding_capacity(e: *const QpEmbedding) -> usize {
    e.as_ref().map_or(0, |e| e.0.capacity())
}

/// # Safety
/// `e` must come from a `qp_embedding_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qp_embedding_free(e: *mut QpEmbedding) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

// ------------------------------------------------------------------ solve and features

/// Builds the clique QUBO, embeds it with UTC chain strength, anneals with the
/// reference simulated annealer and compares with the exact maximum clique.
/// Uses the largest valid clique over reads and a 60 s exact-solver deadline.
///
/// # Safety
/// `g` and `emb` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_solve(
    g: *const QpGraph,
    emb: *const QpEmbedding,
    num_reads: usize,
    annealing_time: f64,
    prefactor: f64,
    seed: u64,
    out: *mut QpSolveResult,
) -> QpStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let emb = deref(emb, "embedding")?;
        if g.0.num_vertices() > emb.0.capacity() {
            return Err(fail(Error::Capacity {
                requested: g.0.num_vertices(),
                capacity: emb.0.capacity(),
            }));
        }
        let cfg = SolveConfig {
            regime: Regime::Fixed {
                annealing_time,
                prefactor,
            },
            num_reads,
            seed,
            best_mode: SelectionMode::LargestValid,
            ..SolveConfig::default()
        };
        let rec = GraphRecord::new(0, &g.0, 0, g.0.stats().density);
        let r = solve_one(&rec, &emb.0, &cfg.annealer, &cfg).map_err(fail)?;
        write_out(
            out,
            QpSolveResult {
                best_clique_size: r.best_clique_size,
                exact_clique_size: r.exact_clique_size,
                reads_with_valid_clique: r.reads_with_valid_clique,
                chain_strength: r.chain_strength,
                min_energy: r.min_energy,
                broken_chain_rate: r.broken_chain_rate,
            },
            "out",
        )
    })
}

/// Writes the 46 features of one instance, in canonical order, to `out`.
///
/// # Safety
/// `g` and `emb` must be live handles; `out` must have room for
/// `qp_num_features()` values.
#[no_mangle]
pub unsafe extern "C" fn qp_extract_features(
    g: *const QpGraph,
    emb: *const QpEmbedding,
    annealing_time: f64,
    prefactor: f64,
    out: *mut f64,
) -> QpStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let emb = deref(emb, "embedding")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let bundle = build_max_clique_qubo(&g.0, QUBO_A, QUBO_B).map_err(fail)?;
        let ising = bundle.model.to_ising().map_err(fail)?;
        let cs = utc_chain_strength(&ising, prefactor).map_err(fail)?;
        let ep = embed_ising(&ising, &emb.0, cs).map_err(fail)?;
        let f = extract_features(&g.0, &bundle, &ep, annealing_time).map_err(fail)?;
        ptr::copy_nonoverlapping(f.0.as_ptr(), out, NUM_FEATURES);
        Ok(())
    })
}

// ------------------------------------------------------------------ models

/// Loads a model document written by `qaprobe train`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_model_load(path: *const c_char, out: *mut *mut QpModel) -> QpStatus {
    guard(|| {
        let doc: ModelDocument = read_json(path_arg(path)?).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(QpModel(doc))), "out")
    })
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_model_kind(m: *const QpModel, out: *mut QpModelKind) -> QpStatus {
    guard(|| {
        let kind = match &deref(m, "model")?.0.model {
            Model::DecisionTree(_) => QpModelKind::DecisionTree,
            Model::GradientBoost(_) => QpModelKind::GradientBoost,
        };
        write_out(out, kind, "out")
    })
}

/// Predicts from a full canonical feature vector. Classifiers write 1.0
/// (solvable) or 0.0 to `value` and the leaf confidence to `confidence`;
/// regressors write the raw clique-size prediction and leave `confidence`
/// untouched. `confidence` may be NULL.
///
/// # Safety
/// `m` must be a live handle; `features` must hold `qp_num_features()`
/// values; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_model_predict(
    m: *const QpModel,
    features: *const f64,
    value: *mut f64,
    confidence: *mut f64,
) -> QpStatus {
    guard(|| {
        let m = deref(m, "model")?;
        if features.is_null() {
            return Err(null("features"));
        }
        let mut f = [0.0; NUM_FEATURES];
        ptr::copy_nonoverlapping(features, f.as_mut_ptr(), NUM_FEATURES);
        let f = Features(f);
        match &m.0.model {
            Model::DecisionTree(t) => {
                let (class, conf) = t.predict_class(&f).map_err(fail)?;
                write_out(value, if class { 1.0 } else { 0.0 }, "value")?;
                if !confidence.is_null() {
                    confidence.write(conf);
                }
            }
            Model::GradientBoost(b) => {
                write_out(value, b.predict_regression(&f).map_err(fail)?, "value")?
            }
        }
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`qp_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qp_model_free(m: *mut QpModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
