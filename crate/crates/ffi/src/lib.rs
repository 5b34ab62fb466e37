//! C ABI over the `physarum` crate.
//!
//! Problems and trajectories are opaque handles created by `physarum_*_new`
//! style functions and released with the matching `_free`. Every fallible
//! function returns a [`PhysarumStatus`]; on failure the message is
//! available from [`physarum_last_error`] on the same thread.
//!
//! Matrices are passed row-major. Output buffers are owned by the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use nalgebra::DMatrix;
use physarum::dynamics::{self, IntegratorConfig, Trajectory};
use physarum::energy;
use physarum::experiments;
use physarum::oracle;
use physarum::problem::{fig1, ladder_family};
use physarum::{Error, PositiveLP, StateVector};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhysarumStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidProblem = 3,
    Parse = 4,
    Io = 5,
    Infeasible = 6,
    Numerical = 7,
    TooLarge = 8,
    StepLimit = 9,
    Panic = 10,
}

/// Opaque problem handle.
pub struct PhysarumProblem {
    lp: PositiveLP,
}

/// Opaque trajectory handle.
pub struct PhysarumTrajectory {
    trajectory: Trajectory,
    oracle_value: Option<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PhysarumStatus {
    match e {
        Error::Parse { .. } => PhysarumStatus::Parse,
        Error::Io(_) => PhysarumStatus::Io,
        Error::Infeasible | Error::InfeasibleOnSupport { .. } => PhysarumStatus::Infeasible,
        Error::TooLarge { .. } => PhysarumStatus::TooLarge,
        Error::InvalidProblem(_)
        | Error::UnbalancedDemands(_)
        | Error::NonPositiveCost { .. }
        | Error::LadderParameter(_) => PhysarumStatus::InvalidProblem,
        Error::NonFinite(_) | Error::Diverged { .. } | Error::BoundaryContact(_) => {
            PhysarumStatus::Numerical
        }
        _ => PhysarumStatus::InvalidArgument,
    }
}

struct Failure(PhysarumStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PhysarumStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PhysarumStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PhysarumStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PhysarumStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn problem_ref<'a>(p: *const PhysarumProblem) -> Result<&'a PositiveLP, Failure> {
    p.as_ref().map(|h| &h.lp).ok_or_else(|| null("problem"))
}

unsafe fn trajectory_ref<'a>(t: *const PhysarumTrajectory) -> Result<&'a PhysarumTrajectory, Failure> {
    t.as_ref().ok_or_else(|| null("trajectory"))
}

fn state_of(lp: &PositiveLP, x: &[f64]) -> Result<StateVector, Failure> {
    if x.len() != lp.m() {
        return Err(Failure(
            PhysarumStatus::InvalidArgument,
            format!("state has {} entries, problem has {}", x.len(), lp.m()),
        ));
    }
    Ok(StateVector::from_slice(x)?)
}

unsafe fn publish(out: *mut *mut PhysarumProblem, lp: PositiveLP) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(PhysarumProblem { lp }));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn physarum_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a problem from an `n × m` row-major matrix `a` and vectors `b`
/// (length `n`), `c` and `d` (length `m`).
///
/// # Safety
/// Array arguments must point to at least the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn physarum_problem_new(
    n: usize,
    m: usize,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    d: *const f64,
    out: *mut *mut PhysarumProblem,
) -> PhysarumStatus {
    guard(|| {
        let len = n.checked_mul(m).ok_or_else(|| {
            Failure(PhysarumStatus::InvalidArgument, "dimensions overflow".into())
        })?;
        let a = input(a, len, "a")?;
        let lp = PositiveLP::new(
            "ffi",
            DMatrix::from_row_slice(n, m, a),
            input(b, n, "b")?.to_vec(),
            input(c, m, "c")?.to_vec(),
            input(d, m, "d")?.to_vec(),
        )?;
        publish(out, lp)
    })
}

/// Reads a problem in the `physarum-lp v1` text format.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn physarum_problem_from_file(
    path: *const c_char,
    out: *mut *mut PhysarumProblem,
) -> PhysarumStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(PhysarumStatus::InvalidArgument, "path is not UTF-8".into()))?;
        publish(out, physarum::format::read_problem(path)?)
    })
}

/// The two-arc example `x1 + x2 = 1`, `c = (1, 2)`, with reactivities `(d1, d2)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn physarum_problem_fig1(
    d1: f64,
    d2: f64,
    out: *mut *mut PhysarumProblem,
) -> PhysarumStatus {
    guard(|| {
        let lp = fig1([1.0, 1.0]).with_reactivity(vec![d1, d2])?;
        publish(out, lp)
    })
}

/// Shortest-path ladder with parameter `f >= 2` and uniform reactivities.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn physarum_problem_ladder(
    f: u32,
    out: *mut *mut PhysarumProblem,
) -> PhysarumStatus {
    guard(|| publish(out, ladder_family(f)?))
}

/// # Safety
/// `problem` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn physarum_problem_free(problem: *mut PhysarumProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of constraints; 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn physarum_problem_rows(problem: *const PhysarumProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.lp.n())
}

/// Number of variables; 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn physarum_problem_cols(problem: *const PhysarumProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.lp.m())
}

/// Minimum-energy solution `q` (length `m`) at the state `x`, its potentials
/// `p` (length `n`, may be null) and `bᵀp` (may be null).
///
/// # Safety
/// Buffers must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn physarum_min_energy(
    problem: *const PhysarumProblem,
    x: *const f64,
    m: usize,
    q_out: *mut f64,
    p_out: *mut f64,
    btp_out: *mut f64,
) -> PhysarumStatus {
    guard(|| {
        let lp = problem_ref(problem)?;
        let state = state_of(lp, input(x, m, "x")?)?;
        let sol = energy::min_energy_solution(lp, &state)?;
        output(q_out, m, "q_out")?.copy_from_slice(sol.q.as_slice());
        if !p_out.is_null() {
            output(p_out, lp.n(), "p_out")?.copy_from_slice(sol.p.as_slice());
        }
        if let Some(btp) = btp_out.as_mut() {
            *btp = sol.btp;
        }
        Ok(())
    })
}

/// One forward-Euler step of size `h` from `x`, written to `x_out`.
///
/// # Safety
/// `x` and `x_out` must hold `m` elements; they may alias.
#[no_mangle]
pub unsafe extern "C" fn physarum_euler_step(
    problem: *const PhysarumProblem,
    x: *const f64,
    m: usize,
    h: f64,
    x_out: *mut f64,
) -> PhysarumStatus {
    guard(|| {
        let lp = problem_ref(problem)?;
        let state = state_of(lp, input(x, m, "x")?)?;
        let next = dynamics::euler_step(lp, &state, h)?;
        output(x_out, m, "x_out")?.copy_from_slice(next.x().as_slice());
        Ok(())
    })
}

/// Exact optimal value by enumeration of basic solutions.
///
/// # Safety
/// `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn physarum_oracle_value(
    problem: *const PhysarumProblem,
    value: *mut f64,
) -> PhysarumStatus {
    guard(|| {
        let lp = problem_ref(problem)?;
        let result = oracle::solve_exhaustive(lp)?;
        *value.as_mut().ok_or_else(|| null("value"))? = result.optimal_value;
        Ok(())
    })
}

/// Integrates from `x0`. `h <= 0` selects the default step size and
/// `max_steps == 0` the default cap. Returns `STEP_LIMIT` (with a valid
/// trajectory in `out`) when the cap is reached before convergence.
///
/// # Safety
/// `x0` must hold `m` elements and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn physarum_solve(
    problem: *const PhysarumProblem,
    x0: *const f64,
    m: usize,
    h: f64,
    max_steps: usize,
    out: *mut *mut PhysarumTrajectory,
) -> PhysarumStatus {
    let mut capped = false;
    let status = guard(|| {
        let lp = problem_ref(problem)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let x0 = state_of(lp, input(x0, m, "x0")?)?;
        let mut cfg = IntegratorConfig::for_problem(lp);
        if h > 0.0 {
            cfg.h = h;
        }
        cfg.max_steps = if max_steps > 0 {
            max_steps
        } else {
            dynamics::iteration_budget(lp, cfg.h, cfg.epsilon) * experiments::SOLVE_BUDGET_MULTIPLE
        };
        let report = experiments::solve(lp, &x0, &cfg)?;
        capped = !report.trajectory.converged();
        *out = Box::into_raw(Box::new(PhysarumTrajectory {
            oracle_value: report.oracle.map(|o| o.optimal_value),
            trajectory: report.trajectory,
        }));
        Ok(())
    });
    if status == PhysarumStatus::Ok && capped {
        set_error("iteration cap reached before convergence".into());
        return PhysarumStatus::StepLimit;
    }
    status
}

/// # Safety
/// `trajectory` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn physarum_trajectory_free(trajectory: *mut PhysarumTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of recorded states; 0 for a null handle.
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn physarum_trajectory_len(trajectory: *const PhysarumTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.trajectory.records.len())
}

/// Number of Euler steps taken; 0 for a null handle.
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn physarum_trajectory_steps(trajectory: *const PhysarumTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.trajectory.steps)
}

/// 1 if the stop rule fired, 0 otherwise.
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn physarum_trajectory_converged(trajectory: *const PhysarumTrajectory) -> i32 {
    trajectory
        .as_ref()
        .map_or(0, |t| i32::from(t.trajectory.converged()))
}

/// Copies record `index` into `x_out` (length `m`) together with its time,
/// cost and residual (each output pointer may be null).
///
/// # Safety
/// `x_out` must be null or hold `m` elements.
#[no_mangle]
pub unsafe extern "C" fn physarum_trajectory_record(
    trajectory: *const PhysarumTrajectory,
    index: usize,
    x_out: *mut f64,
    m: usize,
    time: *mut f64,
    cost: *mut f64,
    residual: *mut f64,
) -> PhysarumStatus {
    guard(|| {
        let t = trajectory_ref(trajectory)?;
        let r = t.trajectory.records.get(index).ok_or_else(|| {
            Failure(PhysarumStatus::InvalidArgument, format!("record {index} out of range"))
        })?;
        if !x_out.is_null() {
            if m != r.x.len() {
                return Err(Failure(
                    PhysarumStatus::InvalidArgument,
                    format!("buffer has {m} entries, state has {}", r.x.len()),
                ));
            }
            output(x_out, m, "x_out")?.copy_from_slice(r.x.as_slice());
        }
        if let Some(v) = time.as_mut() {
            *v = r.time;
        }
        if let Some(v) = cost.as_mut() {
            *v = r.ctx;
        }
        if let Some(v) = residual.as_mut() {
            *v = r.residual_inf;
        }
        Ok(())
    })
}

/// Oracle optimum computed alongside the run. Fails with `TOO_LARGE` when
/// the instance was too large to enumerate.
///
/// # Safety
/// `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn physarum_trajectory_oracle_value(
    trajectory: *const PhysarumTrajectory,
    value: *mut f64,
) -> PhysarumStatus {
    guard(|| {
        let t = trajectory_ref(trajectory)?;
        let v = t.oracle_value.ok_or_else(|| {
            Failure(PhysarumStatus::TooLarge, "no oracle value for this instance".into())
        })?;
        *value.as_mut().ok_or_else(|| null("value"))? = v;
        Ok(())
    })
}
