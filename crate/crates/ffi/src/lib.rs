//! C interface to `chainsched`.
//!
//! Scenarios and schedules cross the boundary as opaque handles created from
//! JSON text. Every function returns a [`CsStatus`]; on failure
//! [`cs_last_error_message`] describes what went wrong on the calling thread.
//! Strings handed out by the library are freed with [`cs_string_free`],
//! handles with their own `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chainsched::lp::{optimal_schedule_with, Arithmetic, LpError, ObjectiveSpec, SolverOptions};
use chainsched::model::{validate_schedule_with, Tolerance};
use chainsched::rational::{from_f64, int, to_exact_string, to_f64};
use chainsched::scenario::{self, ScenarioError};
use chainsched::{Instance, InstallmentPlan, ModelError, Schedule};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Input text was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed JSON or a field with the wrong shape.
    Parse = 3,
    /// Values that parse but describe no valid instance or schedule.
    Model = 4,
    /// The LP has no optimal solution.
    Infeasible = 5,
    /// The simplex iteration cap was reached.
    IterationLimit = 6,
    /// A bug inside the library; the handle arguments are left untouched.
    Internal = 7,
}

/// Arithmetic used by the LP solver.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsMode {
    Rational = 0,
    Float = 1,
}

/// A platform, a load set and an installment plan.
pub struct CsScenario(Instance);

/// A complete timeline with its fractions and makespan.
pub struct CsSchedule(Schedule);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CsStatus, String);

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Model(m) => m.into(),
            other => Failure(CsStatus::Parse, other.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure(CsStatus::Model, e.to_string())
    }
}

impl From<LpError> for Failure {
    fn from(e: LpError) -> Self {
        let status = match e {
            LpError::NotOptimal(_) => CsStatus::Infeasible,
            LpError::IterationLimit(_) => CsStatus::IterationLimit,
            LpError::Model(_) => CsStatus::Model,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `body`, records any failure and converts it to a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            CsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal error");
            CsStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CsStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(CsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn give_string(s: String, out: *mut *mut c_char) {
    let c = CString::new(s).expect("library output has no interior NUL");
    unsafe { *out = c.into_raw() };
}

/// Message for the last failed call on this thread, or null after a
/// success. Owned by the library and valid until the next call.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a scenario document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_from_json(json: *const c_char, out: *mut *mut CsScenario) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = scenario::parse_scenario(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(CsScenario(inst)));
        Ok(())
    })
}

/// Replaces the installment plan: `q[n]` installments for load `n`.
///
/// # Safety
/// `q` must point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_installments(scenario: *mut CsScenario, q: *const usize, len: usize) -> CsStatus {
    guard(|| {
        let sc = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        if q.is_null() {
            return Err(null("q"));
        }
        let plan = InstallmentPlan::new(std::slice::from_raw_parts(q, len).to_vec())?;
        sc.0 = sc.0.with_plan(plan)?;
        Ok(())
    })
}

/// Number of processors and number of loads.
///
/// # Safety
/// Pointers must be valid; either output may be null.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_shape(scenario: *const CsScenario, processors: *mut usize, loads: *mut usize) -> CsStatus {
    guard(|| {
        let sc = handle(scenario, "scenario")?;
        if let Some(p) = processors.as_mut() {
            *p = sc.0.m();
        }
        if let Some(l) = loads.as_mut() {
            *l = sc.0.loads();
        }
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_free(scenario: *mut CsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Solves the makespan LP for the scenario's plan.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_solve(scenario: *const CsScenario, mode: CsMode, out: *mut *mut CsSchedule) -> CsStatus {
    guard(|| {
        let sc = handle(scenario, "scenario")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let arithmetic = match mode {
            CsMode::Rational => Arithmetic::Exact,
            CsMode::Float => Arithmetic::Float,
        };
        let options = SolverOptions { arithmetic, ..SolverOptions::from_env() };
        let s = optimal_schedule_with(&sc.0, &ObjectiveSpec::Makespan, &options)?;
        *out = Box::into_raw(Box::new(CsSchedule(s)));
        Ok(())
    })
}

/// Parses a schedule document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_schedule_from_json(json: *const c_char, out: *mut *mut CsSchedule) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = scenario::parse_schedule(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(CsSchedule(s)));
        Ok(())
    })
}

/// The schedule as JSON, in the same layout the CLI writes.
///
/// # Safety
/// `schedule` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_schedule_to_json(schedule: *const CsSchedule, out: *mut *mut c_char) -> CsStatus {
    guard(|| {
        let s = handle(schedule, "schedule")?;
        if out.is_null() {
            return Err(null("out"));
        }
        give_string(scenario::write_schedule(&s.0), out);
        Ok(())
    })
}

/// Exact makespan as `p/q` text, and optionally its nearest double.
///
/// # Safety
/// `schedule` must be a live handle; `exact` and `approx` may be null.
#[no_mangle]
pub unsafe extern "C" fn cs_schedule_makespan(schedule: *const CsSchedule, exact: *mut *mut c_char, approx: *mut f64) -> CsStatus {
    guard(|| {
        let s = handle(schedule, "schedule")?;
        if !exact.is_null() {
            give_string(to_exact_string(&s.0.makespan), exact);
        }
        if let Some(a) = approx.as_mut() {
            *a = to_f64(&s.0.makespan);
        }
        Ok(())
    })
}

/// # Safety
/// `schedule` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_schedule_free(schedule: *mut CsSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// Checks the schedule against every constraint family. `feasible` gets 1
/// or 0. When `report` is non-null it receives the full JSON report.
/// `tolerance` of 0 means exact comparison.
///
/// # Safety
/// Handles must be live; `feasible` writable; `report` may be null.
#[no_mangle]
pub unsafe extern "C" fn cs_validate(
    scenario: *const CsScenario,
    schedule: *const CsSchedule,
    tolerance: f64,
    feasible: *mut i32,
    report: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        let sc = handle(scenario, "scenario")?;
        let s = handle(schedule, "schedule")?;
        if feasible.is_null() {
            return Err(null("feasible"));
        }
        let tol = if tolerance == 0.0 {
            Tolerance::Exact
        } else {
            let r = from_f64(tolerance)
                .filter(|r| r > &int(0))
                .ok_or_else(|| Failure(CsStatus::Model, format!("tolerance {tolerance} must be finite and positive")))?;
            Tolerance::Absolute(r)
        };
        let r = validate_schedule_with(&sc.0, &s.0, &tol)?;
        *feasible = i32::from(r.feasible);
        if !report.is_null() {
            give_string(scenario::pretty(&scenario::report_to_json(&r)), report);
        }
        Ok(())
    })
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
