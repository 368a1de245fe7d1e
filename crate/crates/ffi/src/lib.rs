//! C interface to `aggper`.
//!
//! Problems and models are opaque heap handles released with their `_free`
//! functions. Every fallible call returns an [`AggperStatus`]; on failure a
//! message is kept per thread and read with [`aggper_last_error`]. Strings
//! returned through out-parameters are released with [`aggper_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use aggper::bnb::{solve_mip, MipParams, MipStatus};
use aggper::harness::{Formulation, Instance};
use aggper::model::text::{emit_model, ModelFormat};
use aggper::sep::{gen_lc_instance, gen_sqp_instance, LcParams, SqpParams};
use aggper::solver::{solve_relaxation, RelaxStatus, SolverTolerances};
use aggper::{ConicModel, Error, Mode, ProblemSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggperStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InvalidModel = 4,
    Budget = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggperFormulation {
    P0 = 0,
    Per = 1,
    Agg = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggperFormat {
    ConicText = 0,
    Json = 1,
}

/// Outcome of a relaxation or MIP solve.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggperSolveStatus {
    Optimal = 0,
    Feasible = 1,
    Infeasible = 2,
    Unbounded = 3,
    Limit = 4,
    NumericalLimit = 5,
}

/// Opaque problem handle.
pub struct AggperProblem(ProblemSpec);

/// Opaque compiled-model handle.
pub struct AggperModel(ConicModel);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct AggperMipResult {
    pub status: i32,
    /// `+inf` without an incumbent.
    pub value: f64,
    pub bound: f64,
    pub root_bound: f64,
    pub gap: f64,
    pub nodes: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AggperStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::UnsupportedFormat(_) => AggperStatus::Parse,
        Error::InvalidModel(_) | Error::Dimension(_) | Error::NotPerCopy(_) => AggperStatus::InvalidModel,
        Error::BudgetExceeded { .. } => AggperStatus::Budget,
        Error::Io(_) => AggperStatus::Io,
        _ => AggperStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (AggperStatus, String)>) -> AggperStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AggperStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AggperStatus::Panic
        }
    }
}

fn lib<T>(r: aggper::Result<T>) -> Result<T, (AggperStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (AggperStatus, String) {
    (AggperStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (AggperStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (AggperStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (AggperStatus, String)> {
    let c = CString::new(s).map_err(|_| (AggperStatus::InvalidArgument, "string contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread. Owned by the library and
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn aggper_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Seeded line-cover instance with `t` classes of `n` members.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aggper_gen_lc(t: u32, n: u32, seed: u64, out: *mut *mut AggperProblem) -> AggperStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (spec, _) = lib(gen_lc_instance(&LcParams { t, n, seed }))?;
        put(out, AggperProblem(spec));
        Ok(())
    })
}

/// Seeded separable quadratic instance with `m` rows.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aggper_gen_sqp(t: u32, n: u32, m: u32, seed: u64, out: *mut *mut AggperProblem) -> AggperStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (spec, _) = lib(gen_sqp_instance(&SqpParams { t, n, m, seed }))?;
        put(out, AggperProblem(spec));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aggper_problem_from_json(json: *const c_char, out: *mut *mut AggperProblem) -> AggperStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, AggperProblem(lib(ProblemSpec::from_json(text))?));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aggper_problem_to_json(problem: *const AggperProblem, out: *mut *mut c_char) -> AggperStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, lib(p.0.to_json())?)
    })
}

/// Number of members summed over classes.
///
/// # Safety
/// `problem` must come from this library or be null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn aggper_problem_members(problem: *const AggperProblem) -> u64 {
    problem.as_ref().map_or(0, |p| p.0.total_members())
}

/// # Safety
/// `problem` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn aggper_problem_free(problem: *mut AggperProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aggper_compile(
    problem: *const AggperProblem,
    formulation: AggperFormulation,
    relaxed: bool,
    out: *mut *mut AggperModel,
) -> AggperStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = match formulation {
            AggperFormulation::P0 => Formulation::P0,
            AggperFormulation::Per => Formulation::Per,
            AggperFormulation::Agg => Formulation::Agg,
        };
        let mode = if relaxed { Mode::Relaxed } else { Mode::Integer };
        let model = lib(Instance::Spec(p.0.clone()).compile(f, mode))?;
        put(out, AggperModel(model));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library or be null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn aggper_model_num_vars(model: *const AggperModel) -> u64 {
    model.as_ref().map_or(0, |m| m.0.num_vars() as u64)
}

/// # Safety
/// `model` must come from this library or be null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn aggper_model_num_integers(model: *const AggperModel) -> u64 {
    model.as_ref().map_or(0, |m| m.0.integer_vars().len() as u64)
}

/// Serializes a model. Release the string with [`aggper_string_free`].
///
/// # Safety
/// `model` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aggper_model_emit(model: *const AggperModel, format: AggperFormat, out: *mut *mut c_char) -> AggperStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = match format {
            AggperFormat::ConicText => ModelFormat::ConicText,
            AggperFormat::Json => ModelFormat::Json,
        };
        let bytes = lib(emit_model(&m.0, f))?;
        put_string(out, String::from_utf8(bytes).expect("emitted text is UTF-8"))
    })
}

/// # Safety
/// `model` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn aggper_model_free(model: *mut AggperModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn aggper_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves the continuous relaxation; `bound` receives a valid lower bound.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggper_solve_relaxation(model: *const AggperModel, status: *mut AggperSolveStatus, bound: *mut f64) -> AggperStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if status.is_null() || bound.is_null() {
            return Err(null("output"));
        }
        let sol = solve_relaxation(&m.0.relaxed(), &SolverTolerances::default());
        *status = match sol.status {
            RelaxStatus::Optimal => AggperSolveStatus::Optimal,
            RelaxStatus::Infeasible => AggperSolveStatus::Infeasible,
            RelaxStatus::Unbounded => AggperSolveStatus::Unbounded,
            RelaxStatus::NumericalLimit => AggperSolveStatus::NumericalLimit,
        };
        *bound = sol.objective;
        Ok(())
    })
}

/// Branch-and-bound with the given relative gap and time limit (seconds,
/// `<= 0` for none).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggper_solve_mip(model: *const AggperModel, mip_gap: f64, time_limit: f64, result: *mut AggperMipResult) -> AggperStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if result.is_null() {
            return Err(null("result"));
        }
        let params = MipParams {
            mip_gap,
            time_limit_seconds: if time_limit > 0.0 { time_limit } else { f64::INFINITY },
            ..MipParams::default()
        };
        let r = lib(solve_mip(&m.0, &params))?;
        let status = match r.status {
            MipStatus::Optimal => AggperSolveStatus::Optimal,
            MipStatus::Feasible => AggperSolveStatus::Feasible,
            MipStatus::Infeasible => AggperSolveStatus::Infeasible,
            MipStatus::Limit => AggperSolveStatus::Limit,
        };
        *result = AggperMipResult {
            status: status as i32,
            value: r.incumbent_value,
            bound: r.bound,
            root_bound: r.root_bound,
            gap: r.gap,
            nodes: r.nodes_explored,
        };
        Ok(())
    })
}

