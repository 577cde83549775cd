//! C interface to the explanation engine.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free`. Every entry point returns a [`DxpStatus`]; on failure
//! [`dxp_last_error`] holds a message for the calling thread. Feature indices
//! cross the boundary 1-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use dxp::enumerate::{ffa_scores, marco_enumerate, EnumerationLimits};
use dxp::explain::{deletion_cxp, dichotomic_cxp, extract_axp, swift_cxp, FeatureOrder, SearchOptions, SwiftParams};
use dxp::mincxp::smallest_cxp;
use dxp::models::parse_model;
use dxp::oracle::{Backend, OracleSpec};
use dxp::{Ball, Error, ExplanationProblem, FeatureSet, Instance, Norm};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DxpStatus {
    Ok = 0,
    Error = 1,
    /// The ball holds no adversarial example: no CXp, and the only AXp is empty.
    NoAdvExample = 2,
    NullPointer = 3,
    InvalidArgument = 4,
    Parse = 5,
    Io = 6,
    Oracle = 7,
    Panic = 8,
    /// The caller's buffer is too short; the required length was written.
    BufferTooSmall = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DxpNorm {
    L0 = 0,
    L1 = 1,
    L2 = 2,
    Linf = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DxpAlgo {
    Linear = 0,
    Dicho = 1,
    Swift = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DxpKind {
    Axp = 0,
    Cxp = 1,
}

/// A classifier, an instance and the oracle used to query them.
pub struct DxpProblem {
    problem: ExplanationProblem,
    oracle: Backend,
}

pub struct DxpExplanation {
    kind: DxpKind,
    features: Vec<usize>,
    oracle_calls: u64,
}

/// Result of an enumeration.
pub struct DxpSets {
    num_features: usize,
    axps: Vec<Vec<usize>>,
    cxps: Vec<Vec<usize>>,
    complete: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DxpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Usage(_) | Error::Validation(_) | Error::Model(_) => DxpStatus::InvalidArgument,
            Error::Parse { .. } => DxpStatus::Parse,
            Error::Io { .. } => DxpStatus::Io,
            Error::Oracle(_) => DxpStatus::Oracle,
            Error::NoAdvExample { .. } => DxpStatus::NoAdvExample,
            Error::Infeasible(_) => DxpStatus::Error,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DxpStatus::NullPointer, format!("{what} is null"))
}

fn set_last_error(message: Option<String>) {
    let message = message.map(|m| CString::new(m.replace('\0', " ")).expect("nul bytes removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DxpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            DxpStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(Some(message));
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(Some(format!("panic: {message}")));
            DxpStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DxpStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Checks `out` and clears it before any work is done.
unsafe fn reset<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = ptr::null_mut();
    Ok(())
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    reset(out)?;
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies `items` into `buf`. `written` always receives the full length.
unsafe fn fill<T: Copy>(items: &[T], buf: *mut T, cap: usize, written: *mut usize) -> Result<(), Failure> {
    if written.is_null() {
        return Err(null("written"));
    }
    *written = items.len();
    if items.len() > cap {
        return Err(Failure(
            DxpStatus::BufferTooSmall,
            format!("buffer holds {cap} items but {} are needed", items.len()),
        ));
    }
    if !items.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(items.as_ptr(), buf, items.len());
    }
    Ok(())
}

fn ball(norm: DxpNorm, epsilon: f64) -> Result<Ball, Failure> {
    let norm = match norm {
        DxpNorm::L0 => Norm::L0,
        DxpNorm::L1 => Norm::L1,
        DxpNorm::L2 => Norm::L2,
        DxpNorm::Linf => Norm::LInf,
    };
    Ok(Ball::new(norm, epsilon)?)
}

fn explanation(kind: DxpKind, features: &FeatureSet, oracle_calls: u64) -> DxpExplanation {
    DxpExplanation {
        kind,
        features: features.to_one_based(),
        oracle_calls,
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn dxp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

#[no_mangle]
pub extern "C" fn dxp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a model document and an instance document from disk.
///
/// # Safety
/// Paths must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dxp_problem_load(
    model_path: *const c_char,
    instance_path: *const c_char,
    out: *mut *mut DxpProblem,
) -> DxpStatus {
    guard(|| {
        reset(out)?;
        let file = dxp::load_model(text(model_path, "model_path")?)?;
        let instance = Instance::load(text(instance_path, "instance_path")?)?;
        let problem = ExplanationProblem::from_file(file, instance)?;
        let oracle = Backend::open(&OracleSpec::Auto, &problem, None)?;
        emit(out, DxpProblem { problem, oracle })
    })
}

/// Builds a problem from a model document held in memory. The instance label
/// is whatever the model predicts at `point`.
///
/// # Safety
/// `model_json` must be a nul-terminated string and `point` must hold `len`
/// values.
#[no_mangle]
pub unsafe extern "C" fn dxp_problem_from_json(
    model_json: *const c_char,
    point: *const f64,
    len: usize,
    out: *mut *mut DxpProblem,
) -> DxpStatus {
    guard(|| {
        reset(out)?;
        let file = parse_model(text(model_json, "model_json")?, "<memory>")?;
        if point.is_null() && len > 0 {
            return Err(null("point"));
        }
        let point = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(point, len).to_vec()
        };
        let problem = ExplanationProblem::at_point(file.model, file.space, point)?;
        let oracle = Backend::open(&OracleSpec::Auto, &problem, None)?;
        emit(out, DxpProblem { problem, oracle })
    })
}

/// Replaces the oracle: `auto`, `exhaustive`, `linear` or `external:<command>`.
/// A `timeout_ms` of 0 means no per-query timeout.
///
/// # Safety
/// `problem` must come from this library; `spec` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn dxp_problem_set_oracle(
    problem: *mut DxpProblem,
    spec: *const c_char,
    timeout_ms: u64,
) -> DxpStatus {
    guard(|| {
        let p = problem.as_mut().ok_or_else(|| null("problem"))?;
        let spec: OracleSpec = text(spec, "spec")?.parse()?;
        let timeout = (timeout_ms > 0).then(|| Duration::from_millis(timeout_ms));
        p.oracle = Backend::open(&spec, &p.problem, timeout)?;
        Ok(())
    })
}

/// # Safety
/// `problem` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dxp_problem_free(problem: *mut DxpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn dxp_problem_num_features(problem: *const DxpProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.num_features())
}

/// Predicted class of the instance.
///
/// # Safety
/// `problem` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn dxp_problem_label(problem: *const DxpProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.label())
}

/// One CXp. `workers` is only read by [`DxpAlgo::Swift`].
///
/// # Safety
/// `problem` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dxp_cxp(
    problem: *const DxpProblem,
    norm: DxpNorm,
    epsilon: f64,
    algo: DxpAlgo,
    workers: usize,
    out: *mut *mut DxpExplanation,
) -> DxpStatus {
    guard(|| {
        reset(out)?;
        let p = handle(problem, "problem")?;
        let ball = ball(norm, epsilon)?;
        let order = FeatureOrder::natural(p.problem.num_features());
        let e = match algo {
            DxpAlgo::Linear => deletion_cxp(&mut p.oracle.clone(), &order, ball)?,
            DxpAlgo::Dicho => dichotomic_cxp(&mut p.oracle.clone(), &order, ball, &SearchOptions::default())?,
            DxpAlgo::Swift => {
                let params = SwiftParams::new(workers);
                params.validate()?;
                swift_cxp(&p.oracle, &order, ball, &params)?
            }
        };
        emit(out, explanation(DxpKind::Cxp, &e.features, e.stats.oracle_calls))
    })
}

/// One AXp, shrunk from the full feature set.
///
/// # Safety
/// `problem` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dxp_axp(
    problem: *const DxpProblem,
    norm: DxpNorm,
    epsilon: f64,
    out: *mut *mut DxpExplanation,
) -> DxpStatus {
    guard(|| {
        reset(out)?;
        let p = handle(problem, "problem")?;
        let ball = ball(norm, epsilon)?;
        let m = p.problem.num_features();
        let e = extract_axp(
            &mut p.oracle.clone(),
            &FeatureSet::full(m),
            &FeatureOrder::natural(m),
            ball,
        )?;
        emit(out, explanation(DxpKind::Axp, &e.features, e.stats.oracle_calls))
    })
}

/// A CXp of minimum size.
///
/// # Safety
/// `problem` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dxp_min_cxp(
    problem: *const DxpProblem,
    norm: DxpNorm,
    epsilon: f64,
    out: *mut *mut DxpExplanation,
) -> DxpStatus {
    guard(|| {
        reset(out)?;
        let p = handle(problem, "problem")?;
        let r = smallest_cxp(&mut p.oracle.clone(), ball(norm, epsilon)?)?;
        let e = r.explanation;
        emit(out, explanation(DxpKind::Cxp, &e.features, e.stats.oracle_calls))
    })
}

/// # Safety
/// `e` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn dxp_explanation_kind(e: *const DxpExplanation) -> DxpKind {
    e.as_ref().map_or(DxpKind::Cxp, |e| e.kind)
}

/// # Safety
/// `e` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn dxp_explanation_len(e: *const DxpExplanation) -> usize {
    e.as_ref().map_or(0, |e| e.features.len())
}

/// # Safety
/// `e` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn dxp_explanation_oracle_calls(e: *const DxpExplanation) -> u64 {
    e.as_ref().map_or(0, |e| e.oracle_calls)
}

/// Copies the 1-based features into `buf`, ascending.
///
/// # Safety
/// `e` must come from this library; `buf` must hold `cap` values and
/// `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dxp_explanation_features(
    e: *const DxpExplanation,
    buf: *mut usize,
    cap: usize,
    written: *mut usize,
) -> DxpStatus {
    guard(|| fill(&handle(e, "explanation")?.features, buf, cap, written))
}

/// # Safety
/// `e` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dxp_explanation_free(e: *mut DxpExplanation) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Enumerates AXps and CXps. A `limit` of 0 means no limit.
///
/// # Safety
/// `problem` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dxp_enumerate(
    problem: *const DxpProblem,
    norm: DxpNorm,
    epsilon: f64,
    limit: usize,
    out: *mut *mut DxpSets,
) -> DxpStatus {
    guard(|| {
        reset(out)?;
        let p = handle(problem, "problem")?;
        let m = p.problem.num_features();
        let limits = EnumerationLimits {
            total: (limit > 0).then_some(limit),
            cxps: None,
        };
        let sets = marco_enumerate(
            &mut p.oracle.clone(),
            &FeatureOrder::natural(m),
            ball(norm, epsilon)?,
            limits,
            |_| {},
        )
        .map_err(Error::from)?;
        let list = |v: &[FeatureSet]| v.iter().map(FeatureSet::to_one_based).collect();
        emit(
            out,
            DxpSets {
                num_features: m,
                axps: list(&sets.axps),
                cxps: list(&sets.cxps),
                complete: sets.complete,
            },
        )
    })
}

impl DxpSets {
    fn of(&self, kind: DxpKind) -> &[Vec<usize>] {
        match kind {
            DxpKind::Axp => &self.axps,
            DxpKind::Cxp => &self.cxps,
        }
    }
}

/// # Safety
/// `sets` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn dxp_sets_count(sets: *const DxpSets, kind: DxpKind) -> usize {
    sets.as_ref().map_or(0, |s| s.of(kind).len())
}

/// Whether the enumeration ran to the end rather than stopping at the limit.
///
/// # Safety
/// `sets` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn dxp_sets_complete(sets: *const DxpSets) -> bool {
    sets.as_ref().is_some_and(|s| s.complete)
}

/// Copies the `index`-th explanation of `kind`, in discovery order.
///
/// # Safety
/// `sets` must come from this library; `buf` must hold `cap` values and
/// `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dxp_sets_get(
    sets: *const DxpSets,
    kind: DxpKind,
    index: usize,
    buf: *mut usize,
    cap: usize,
    written: *mut usize,
) -> DxpStatus {
    guard(|| {
        let list = handle(sets, "sets")?.of(kind);
        let item = list.get(index).ok_or_else(|| {
            Failure(
                DxpStatus::InvalidArgument,
                format!("index {index} out of range for {} sets", list.len()),
            )
        })?;
        fill(item, buf, cap, written)
    })
}

/// Per-feature attribution: the fraction of CXps containing each feature.
///
/// # Safety
/// `sets` must come from this library; `buf` must hold `cap` values and
/// `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dxp_sets_ffa(
    sets: *const DxpSets,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> DxpStatus {
    guard(|| {
        let s = handle(sets, "sets")?;
        let cxps: Vec<FeatureSet> = s.cxps.iter().map(|c| c.iter().map(|i| i - 1).collect()).collect();
        let scores = ffa_scores(&cxps, s.num_features)?;
        fill(scores.scores(), buf, cap, written)
    })
}

/// # Safety
/// `sets` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dxp_sets_free(sets: *mut DxpSets) {
    if !sets.is_null() {
        drop(Box::from_raw(sets));
    }
}
