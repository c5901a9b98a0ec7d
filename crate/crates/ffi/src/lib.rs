//! C ABI for dnflow.
//!
//! Every function returns a [`DnflowStatus`] code (0 on success) and writes
//! results through out-pointers. Handles are opaque and must be released
//! with the matching `*_free`. Strings returned through `char **` are owned
//! by the caller and released with [`dnflow_string_free`]. After a failure,
//! [`dnflow_last_error_message`] describes it until the next call on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use dnflow::geometry::GeometricBundle;
use dnflow::harness::{run_experiment, ExperimentKind};
use dnflow::solver::{RadialState, Solver, SolverConfig};
use dnflow::theory::{classify, predicted_rates};
use dnflow::{Error, ProblemConfig};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    InvalidSpec = 4,
    Range = 5,
    Numeric = 6,
    InvalidAssumption = 7,
    Regime = 8,
    Stiffness = 9,
    SchemeFailure = 10,
    Fit = 11,
    InvalidExperiment = 12,
    Io = 13,
    Json = 14,
    BufferTooSmall = 15,
    Panic = 16,
}

impl From<&Error> for DnflowStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Range { .. } => DnflowStatus::Range,
            Error::Numeric(_) => DnflowStatus::Numeric,
            Error::InvalidAssumption(_) => DnflowStatus::InvalidAssumption,
            Error::Regime(_) => DnflowStatus::Regime,
            Error::InvalidSpec(_) => DnflowStatus::InvalidSpec,
            Error::InvalidInput(_) => DnflowStatus::InvalidInput,
            Error::Stiffness { .. } => DnflowStatus::Stiffness,
            Error::SchemeFailure { .. } => DnflowStatus::SchemeFailure,
            Error::Fit(_) => DnflowStatus::Fit,
            Error::InvalidExperiment(_) => DnflowStatus::InvalidExperiment,
            Error::Io(_) => DnflowStatus::Io,
            Error::Json(_) => DnflowStatus::Json,
        }
    }
}

/// Observables of a simulation at its current time.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DnflowObservation {
    pub t: f64,
    pub sup: f64,
    pub support_radius: f64,
    pub mass: f64,
    pub r_max: f64,
}

/// Tabulated geometry of one problem.
pub struct DnflowBundle {
    inner: Arc<GeometricBundle>,
}

/// A solver with its current state.
pub struct DnflowSimulation {
    solver: Solver,
    state: RadialState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(DnflowStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(DnflowStatus::from(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(DnflowStatus::Json, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DnflowStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DnflowStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside dnflow".into());
            DnflowStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(DnflowStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(DnflowStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(DnflowStatus::InvalidInput, e.to_string()))
}

/// Message of the last failure on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn dnflow_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dnflow_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dnflow_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the geometric bundle of a JSON problem configuration.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_bundle_new(config_json: *const c_char, out: *mut *mut DnflowBundle) -> DnflowStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg = ProblemConfig::from_json_str(str_arg(config_json, "config_json")?)?;
        let bundle = cfg.bundle()?;
        *out = Box::into_raw(Box::new(DnflowBundle {
            inner: Arc::new(bundle),
        }));
        Ok(())
    })
}

/// Releases a bundle. Null is ignored.
///
/// # Safety
/// `bundle` must come from [`dnflow_bundle_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dnflow_bundle_free(bundle: *mut DnflowBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

unsafe fn bundle_eval(
    bundle: *const DnflowBundle,
    x: f64,
    out: *mut f64,
    f: impl FnOnce(&GeometricBundle, f64) -> dnflow::Result<f64>,
) -> DnflowStatus {
    guard(|| {
        let b = bundle.as_ref().ok_or_else(|| null("bundle"))?;
        let out = out_arg(out, "out")?;
        *out = f(&b.inner, x)?;
        Ok(())
    })
}

/// `V(r)`, the volume of the geodesic ball.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_bundle_volume(bundle: *const DnflowBundle, r: f64, out: *mut f64) -> DnflowStatus {
    bundle_eval(bundle, r, out, |b, r| b.volume(r))
}

/// `V_rho(r)`, the weighted ball volume.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_bundle_vol_rho(bundle: *const DnflowBundle, r: f64, out: *mut f64) -> DnflowStatus {
    bundle_eval(bundle, r, out, |b, r| b.vol_rho(r))
}

/// `psi(r)`.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_bundle_psi(bundle: *const DnflowBundle, r: f64, out: *mut f64) -> DnflowStatus {
    bundle_eval(bundle, r, out, |b, r| b.psi(r))
}

/// `Z(s)`, the inverse of `psi`.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_bundle_z_tilde(bundle: *const DnflowBundle, s: f64, out: *mut f64) -> DnflowStatus {
    bundle_eval(bundle, s, out, |b, s| b.z_tilde(s))
}

/// Regime classification with assumption and lemma reports, as JSON.
///
/// # Safety
/// `bundle` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_theory_classify(bundle: *const DnflowBundle, out_json: *mut *mut c_char) -> DnflowStatus {
    guard(|| {
        let b = bundle.as_ref().ok_or_else(|| null("bundle"))?;
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let report = classify(&b.inner)?;
        *out = to_c_string(serde_json::to_string(&report)?)?;
        Ok(())
    })
}

/// Predicted decay exponent `delta1`.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_theory_delta1(bundle: *const DnflowBundle, out: *mut f64) -> DnflowStatus {
    bundle_eval(bundle, 0.0, out, |b, _| predicted_rates(b).map(|r| r.delta1))
}

/// Starts a simulation from a bump of radius `r0` and weighted mass `mass`.
/// `solver_json` may be null for the default solver settings.
///
/// # Safety
/// `bundle` must be a live handle; `solver_json` null or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_simulation_new(
    bundle: *const DnflowBundle,
    solver_json: *const c_char,
    r0: f64,
    mass: f64,
    out: *mut *mut DnflowSimulation,
) -> DnflowStatus {
    guard(|| {
        let b = bundle.as_ref().ok_or_else(|| null("bundle"))?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let config: SolverConfig = if solver_json.is_null() {
            SolverConfig::default()
        } else {
            serde_json::from_str(str_arg(solver_json, "solver_json")?)?
        };
        let solver = Solver::new(b.inner.clone(), config)?;
        let state = solver.init_bump(r0, mass)?;
        *out = Box::into_raw(Box::new(DnflowSimulation { solver, state }));
        Ok(())
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from [`dnflow_simulation_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dnflow_simulation_free(sim: *mut DnflowSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// One time step, never past `t_limit`; writes the step size to `dt` when non-null.
///
/// # Safety
/// `sim` must be a live handle; `dt` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_simulation_step(sim: *mut DnflowSimulation, t_limit: f64, dt: *mut f64) -> DnflowStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        let h = s.solver.step(&mut s.state, t_limit)?;
        if let Some(dt) = dt.as_mut() {
            *dt = h;
        }
        Ok(())
    })
}

/// Advances to `t_end` (grid extension included).
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dnflow_simulation_run(sim: *mut DnflowSimulation, t_end: f64) -> DnflowStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        let every = (t_end - s.state.time).max(f64::MIN_POSITIVE);
        s.solver
            .run(&mut s.state, t_end, dnflow::solver::ObservationSchedule::Linear { every })?;
        Ok(())
    })
}

/// Current observables.
///
/// # Safety
/// `sim` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_simulation_observe(
    sim: *const DnflowSimulation,
    out: *mut DnflowObservation,
) -> DnflowStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out_arg(out, "out")?;
        let o = s.solver.observe(&s.state);
        *out = DnflowObservation {
            t: o.t,
            sup: o.sup,
            support_radius: o.support_radius,
            mass: o.mass,
            r_max: o.r_max,
        };
        Ok(())
    })
}

/// Copies cell centers and averages into caller buffers of length `len`.
/// With null buffers, only the cell count is written to `cells`.
///
/// # Safety
/// `sim` must be a live handle; `cells` writable; buffers null or of length `len`.
#[no_mangle]
pub unsafe extern "C" fn dnflow_simulation_profile(
    sim: *const DnflowSimulation,
    centers: *mut f64,
    values: *mut f64,
    len: usize,
    cells: *mut usize,
) -> DnflowStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let k = s.state.u.len();
        *out_arg(cells, "cells")? = k;
        if centers.is_null() && values.is_null() {
            return Ok(());
        }
        if len < k {
            return Err(Failure(
                DnflowStatus::BufferTooSmall,
                format!("buffer of {len} for {k} cells"),
            ));
        }
        if !centers.is_null() {
            std::slice::from_raw_parts_mut(centers, k).copy_from_slice(s.solver.grid().centers());
        }
        if !values.is_null() {
            std::slice::from_raw_parts_mut(values, k).copy_from_slice(&s.state.u);
        }
        Ok(())
    })
}

/// Runs a named experiment (`decay`, `fsp`, `universal`, `blowup`, `barenblatt`) and returns the result as JSON.
///
/// # Safety
/// `kind` and `config_json` must be NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn dnflow_experiment_run(
    kind: *const c_char,
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> DnflowStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        *out = ptr::null_mut();
        let kind: ExperimentKind = str_arg(kind, "kind")?.parse()?;
        let cfg = ProblemConfig::from_json_str(str_arg(config_json, "config_json")?)?;
        let result = run_experiment(kind, &cfg)?;
        *out = to_c_string(serde_json::to_string(&result)?)?;
        Ok(())
    })
}
