//! C interface to the planner.
//!
//! Instances and plans are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`PtlStatus`]; on failure `ptl_last_error` describes the problem for the
//! calling thread. Strings returned through out-parameters are released
//! with `ptl_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ptlplan::io::{self, PlanFile};
use ptlplan::model::{generate_instance, GeneratorParams};
use ptlplan::{CostFunction, CostKind, Error, Instance, Plan, Problem, SolverConfig, WindowOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInput = 3,
    Refused = 4,
    Io = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtlCostKind {
    MinMax = 0,
    CMinSum = 1,
    Combined = 2,
}

impl From<PtlCostKind> for CostKind {
    fn from(k: PtlCostKind) -> Self {
        match k {
            PtlCostKind::MinMax => CostKind::MinMax,
            PtlCostKind::CMinSum => CostKind::CMinSum,
            PtlCostKind::Combined => CostKind::Combined,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PtlSolverConfig {
    pub restarts: u32,
    pub rcl_alpha: f64,
    pub seed: u64,
    pub cost_function: PtlCostKind,
    pub k_c: f64,
}

impl From<&PtlSolverConfig> for SolverConfig {
    fn from(c: &PtlSolverConfig) -> Self {
        SolverConfig {
            restarts: c.restarts as usize,
            rcl_alpha: c.rcl_alpha,
            seed: c.seed,
            cost_function: c.cost_function.into(),
            k_c: c.k_c,
            ..SolverConfig::default()
        }
    }
}

pub struct PtlInstance {
    instance: Instance,
}

pub struct PtlPlan {
    problem: Problem,
    plan: Plan,
    file: PlanFile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PtlStatus {
    match e {
        Error::Parameter(_) => PtlStatus::InvalidArgument,
        Error::Refused(_) => PtlStatus::Refused,
        Error::Io(_) => PtlStatus::Io,
        _ => PtlStatus::InvalidInput,
    }
}

fn fail(status: PtlStatus, msg: impl Into<String>) -> PtlStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PtlStatus>) -> PtlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(PtlStatus::Internal, "internal panic"),
    }
}

fn lib<T>(r: ptlplan::Result<T>) -> Result<T, PtlStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, PtlStatus> {
    p.as_ref().ok_or_else(|| fail(PtlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, PtlStatus> {
    p.as_mut().ok_or_else(|| fail(PtlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, PtlStatus> {
    if p.is_null() {
        return Err(fail(PtlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(PtlStatus::InvalidInput, format!("{what} is not UTF-8")))
}

fn to_c_string(s: String) -> Result<*mut c_char, PtlStatus> {
    CString::new(s).map(CString::into_raw).map_err(|_| fail(PtlStatus::Internal, "string contains a nul byte"))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ptl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ptl_solver_config_default() -> PtlSolverConfig {
    let d = SolverConfig::default();
    PtlSolverConfig {
        restarts: d.restarts as u32,
        rcl_alpha: d.rcl_alpha,
        seed: d.seed,
        cost_function: PtlCostKind::Combined,
        k_c: d.k_c,
    }
}

/// # Safety
/// `json` must be a nul-terminated string and `out_instance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptl_instance_from_json(json: *const c_char, out_instance: *mut *mut PtlInstance) -> PtlStatus {
    guard(|| {
        let dst = out(out_instance, "out_instance")?;
        let instance = lib(io::instance_from_json(read_str(json, "json")?))?;
        *dst = Box::into_raw(Box::new(PtlInstance { instance }));
        Ok(())
    })
}

/// Generates a synthetic instance with default generator parameters.
///
/// # Safety
/// `out_instance` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptl_instance_generate(
    seed: u64,
    d_max: f64,
    n_vehicles: u32,
    budget_percent: f64,
    out_instance: *mut *mut PtlInstance,
) -> PtlStatus {
    guard(|| {
        let dst = out(out_instance, "out_instance")?;
        let params = GeneratorParams { n_vehicles: n_vehicles as usize, budget_percent, ..GeneratorParams::default() };
        let instance = lib(generate_instance(seed, d_max, &params))?;
        *dst = Box::into_raw(Box::new(PtlInstance { instance }));
        Ok(())
    })
}

/// # Safety
/// `instance` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ptl_instance_free(instance: *mut PtlInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of segments, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn ptl_instance_segment_count(instance: *const PtlInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.instance.n_seg())
}

/// # Safety
/// `instance` must be a valid handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptl_instance_to_json(instance: *const PtlInstance, out_json: *mut *mut c_char) -> PtlStatus {
    guard(|| {
        let dst = out(out_json, "out_json")?;
        let i = borrow(instance, "instance")?;
        *dst = to_c_string(lib(io::instance_to_json(&i.instance))?)?;
        Ok(())
    })
}

/// Solves the instance. `config` may be null for defaults. An infeasible
/// plan is still returned; check `ptl_plan_feasible`.
///
/// # Safety
/// Pointers must be valid; `config` may be null.
#[no_mangle]
pub unsafe extern "C" fn ptl_solve(
    instance: *const PtlInstance,
    config: *const PtlSolverConfig,
    out_plan: *mut *mut PtlPlan,
) -> PtlStatus {
    guard(|| {
        let dst = out(out_plan, "out_plan")?;
        let i = &borrow(instance, "instance")?.instance;
        let cfg = config.as_ref().map_or_else(SolverConfig::default, SolverConfig::from);
        let res = lib(ptlplan::solve(i, &cfg))?;
        let problem = i.problem();
        let file = lib(PlanFile::new(&problem, io::instance_hash(i), &res.best_plan, cfg.cost_function, cfg.k_c, res.best_cost))?;
        *dst = Box::into_raw(Box::new(PtlPlan { problem, plan: res.best_plan, file }));
        Ok(())
    })
}

/// # Safety
/// `plan` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ptl_plan_free(plan: *mut PtlPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// # Safety
/// `plan` must be a valid handle and `out_cost` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptl_plan_cost(plan: *const PtlPlan, out_cost: *mut f64) -> PtlStatus {
    guard(|| {
        *out(out_cost, "out_cost")? = borrow(plan, "plan")?.file.cost_value;
        Ok(())
    })
}

/// 1 if every tour is within budget and coverage is exact, 0 otherwise or
/// for a null handle.
///
/// # Safety
/// `plan` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn ptl_plan_feasible(plan: *const PtlPlan) -> i32 {
    plan.as_ref().map_or(0, |p| p.file.feasible as i32)
}

/// # Safety
/// `plan` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn ptl_plan_tour_count(plan: *const PtlPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.plan.tours.len())
}

/// Battery cost (percent) of tour `index`.
///
/// # Safety
/// `plan` must be a valid handle and `out_cost` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptl_plan_tour_cost(plan: *const PtlPlan, index: usize, out_cost: *mut f64) -> PtlStatus {
    guard(|| {
        let dst = out(out_cost, "out_cost")?;
        let p = borrow(plan, "plan")?;
        let t = p.file.tours.get(index).ok_or_else(|| {
            fail(PtlStatus::InvalidArgument, format!("tour index {index} out of range ({} tours)", p.file.tours.len()))
        })?;
        *dst = t.battery_cost;
        Ok(())
    })
}

/// Plan in the same JSON format the command-line tool writes.
///
/// # Safety
/// `plan` must be a valid handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ptl_plan_to_json(plan: *const PtlPlan, out_json: *mut *mut c_char) -> PtlStatus {
    guard(|| {
        let dst = out(out_json, "out_json")?;
        let p = borrow(plan, "plan")?;
        let s = serde_json::to_string_pretty(&p.file).map_err(|e| fail(PtlStatus::Internal, e.to_string()))?;
        *dst = to_c_string(s)?;
        Ok(())
    })
}

/// Re-plan window of a feasible plan. `dt <= 0` selects the default grid.
/// `config` (may be null) controls the re-plans.
///
/// # Safety
/// `plan` must be a valid handle, out pointers valid; `config` may be null.
#[no_mangle]
pub unsafe extern "C" fn ptl_compute_window(
    plan: *const PtlPlan,
    config: *const PtlSolverConfig,
    dt: f64,
    out_window_percent: *mut f64,
    out_t_star: *mut f64,
) -> PtlStatus {
    guard(|| {
        let wp = out(out_window_percent, "out_window_percent")?;
        let ts = out(out_t_star, "out_t_star")?;
        let p = borrow(plan, "plan")?;
        let cfg = config.as_ref().map_or_else(SolverConfig::default, SolverConfig::from);
        let opts = WindowOptions { dt: (dt > 0.0).then_some(dt), ..WindowOptions::default() };
        let r = lib(ptlplan::compute_window(&p.problem, &p.plan, &cfg, &opts))?;
        *wp = r.window_percent;
        *ts = r.t_star;
        Ok(())
    })
}

/// Evaluates a cost function over `n` tour costs.
///
/// # Safety
/// `costs` must point to `n` doubles and `out_value` be valid.
#[no_mangle]
pub unsafe extern "C" fn ptl_cost_evaluate(
    kind: PtlCostKind,
    costs: *const f64,
    n: usize,
    c_max: f64,
    k_c: f64,
    out_value: *mut f64,
) -> PtlStatus {
    guard(|| {
        let dst = out(out_value, "out_value")?;
        if costs.is_null() {
            return Err(fail(PtlStatus::NullPointer, "costs is null"));
        }
        let slice = std::slice::from_raw_parts(costs, n);
        let f = lib(CostFunction::new(kind.into(), k_c, c_max))?;
        *dst = lib(f.evaluate(slice))?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ptl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
