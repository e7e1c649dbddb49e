// SPDX-License-Identifier: Apache-2.0

//! C interface to `qbcharge`.
//!
//! Scenarios and trajectories are opaque heap handles created and released
//! through this API. Every fallible function returns a [`QbStatus`]; on
//! failure, [`qb_last_error_message`] describes the most recent error on the
//! calling thread. Status values coincide with the command-line exit codes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qbcharge::cli::config::ScenarioFile;
use qbcharge::cli::exit_code;
use qbcharge::dynamics::{
    charging_time, integrate, run_to_steady, steady_state_value, Method, TrajectoryResult,
};
use qbcharge::{Error, Level, ScenarioConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbStatus {
    Ok = 0,
    Io = 1,
    InvalidArgument = 2,
    Integration = 3,
    Capacity = 4,
    NullPointer = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbMethod {
    Exact = 0,
    Meanfield = 1,
}

impl From<QbMethod> for Method {
    fn from(m: QbMethod) -> Self {
        match m {
            QbMethod::Exact => Method::Exact,
            QbMethod::Meanfield => Method::Meanfield,
        }
    }
}

impl From<Method> for QbMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Exact => QbMethod::Exact,
            Method::Meanfield => QbMethod::Meanfield,
        }
    }
}

/// Opaque scenario handle.
pub struct QbScenario {
    inner: ScenarioConfig,
}

/// Opaque trajectory handle.
pub struct QbTrajectory {
    inner: TrajectoryResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> QbStatus {
    match exit_code(err) {
        2 => QbStatus::InvalidArgument,
        3 => QbStatus::Integration,
        4 => QbStatus::Capacity,
        _ => QbStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> QbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QbStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer passed as `{what}`"));
            QbStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            QbStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    let slot = deref_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Charger of `n_charger` spins and `n_batteries` batteries of
/// `battery_size` spins each; charger excited, batteries ground.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qb_scenario_new(
    n_charger: usize,
    n_batteries: usize,
    battery_size: usize,
    gamma_down: f64,
    gamma_up: f64,
    out: *mut *mut QbScenario,
) -> QbStatus {
    guarded(|| {
        let inner = ScenarioConfig::new(
            n_charger,
            vec![battery_size; n_batteries],
            gamma_down,
            gamma_up,
        );
        inner.validate()?;
        emit(out, QbScenario { inner })
    })
}

/// Scenario with individual battery sizes.
///
/// # Safety
/// `battery_sizes` must point to `n_batteries` readable values; `out` as in
/// [`qb_scenario_new`].
#[no_mangle]
pub unsafe extern "C" fn qb_scenario_new_sizes(
    n_charger: usize,
    battery_sizes: *const usize,
    n_batteries: usize,
    gamma_down: f64,
    gamma_up: f64,
    out: *mut *mut QbScenario,
) -> QbStatus {
    guarded(|| {
        if battery_sizes.is_null() && n_batteries > 0 {
            return Err(Failure::Null("battery_sizes"));
        }
        let sizes = if n_batteries == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(battery_sizes, n_batteries).to_vec()
        };
        let inner = ScenarioConfig::new(n_charger, sizes, gamma_down, gamma_up);
        inner.validate()?;
        emit(out, QbScenario { inner })
    })
}

/// Parses a TOML scenario file body. `method_out` may be null.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` as in [`qb_scenario_new`];
/// `method_out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qb_scenario_from_toml(
    toml: *const c_char,
    out: *mut *mut QbScenario,
    method_out: *mut QbMethod,
) -> QbStatus {
    guarded(|| {
        if toml.is_null() {
            return Err(Failure::Null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|_| Error::Config("scenario text is not UTF-8".into()))?;
        let file = ScenarioFile::parse(text)?;
        let inner = file.scenario()?;
        if let Some(m) = method_out.as_mut() {
            *m = file.method.into();
        }
        emit(out, QbScenario { inner })
    })
}

fn update(
    scenario: *mut QbScenario,
    f: impl FnOnce(&mut ScenarioConfig) -> Result<(), Error>,
) -> QbStatus {
    guarded(|| {
        // SAFETY: the caller guarantees `scenario` is null or a live handle.
        let s = unsafe { deref_mut(scenario, "scenario")? };
        let mut candidate = s.inner.clone();
        f(&mut candidate)?;
        candidate.validate()?;
        s.inner = candidate;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_scenario_set_nbar(scenario: *mut QbScenario, nbar: f64) -> QbStatus {
    update(scenario, |s| {
        s.nbar = nbar;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_scenario_set_horizon(
    scenario: *mut QbScenario,
    tau_max: f64,
    output_stride: f64,
) -> QbStatus {
    update(scenario, |s| {
        s.tau_max = tau_max;
        s.output_stride = output_stride;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_scenario_set_tolerances(
    scenario: *mut QbScenario,
    rtol: f64,
    atol: f64,
) -> QbStatus {
    update(scenario, |s| {
        s.rtol = rtol;
        s.atol = atol;
        Ok(())
    })
}

/// Sets ensemble `ensemble` (0 = charger) fully excited or ground.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_scenario_set_initial_level(
    scenario: *mut QbScenario,
    ensemble: usize,
    excited: bool,
) -> QbStatus {
    update(scenario, |s| {
        let n = s.initial_levels.len();
        let slot = s
            .initial_levels
            .get_mut(ensemble)
            .ok_or_else(|| Error::InvalidArgument {
                field: "ensemble".into(),
                reason: format!("index {ensemble} out of range for {n} ensembles"),
            })?;
        *slot = if excited {
            Level::Excited
        } else {
            Level::Ground
        };
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_scenario_free(scenario: *mut QbScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Integrates once on the scenario's own horizon.
///
/// # Safety
/// `scenario` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_integrate(
    scenario: *const QbScenario,
    method: QbMethod,
    out: *mut *mut QbTrajectory,
) -> QbStatus {
    guarded(|| {
        let s = deref(scenario, "scenario")?;
        let inner = integrate(&s.inner, method.into())?;
        emit(out, QbTrajectory { inner })
    })
}

/// Integrates, doubling the horizon until every ensemble is steady.
///
/// # Safety
/// As for [`qb_integrate`].
#[no_mangle]
pub unsafe extern "C" fn qb_run_to_steady(
    scenario: *const QbScenario,
    method: QbMethod,
    out: *mut *mut QbTrajectory,
) -> QbStatus {
    guarded(|| {
        let s = deref(scenario, "scenario")?;
        let inner = run_to_steady(&s.inner, method.into())?;
        emit(out, QbTrajectory { inner })
    })
}

/// Number of grid points, 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_trajectory_len(traj: *const QbTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.tau.len())
}

/// Number of ensembles (charger included), 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_trajectory_n_ensembles(traj: *const QbTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.n_ensembles())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(Failure::Null("buf"));
    }
    if len < src.len() {
        return Err(Error::InvalidArgument {
            field: "len".into(),
            reason: format!("buffer holds {len} values, need {}", src.len()),
        }
        .into());
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Copies the scaled-time grid into `buf` (capacity `len`).
///
/// # Safety
/// `traj` live; `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn qb_trajectory_tau(
    traj: *const QbTrajectory,
    buf: *mut f64,
    len: usize,
) -> QbStatus {
    guarded(|| copy_out(&deref(traj, "traj")?.inner.tau, buf, len))
}

/// Copies the energy density of `ensemble` into `buf` (capacity `len`).
///
/// # Safety
/// As for [`qb_trajectory_tau`].
#[no_mangle]
pub unsafe extern "C" fn qb_trajectory_energies(
    traj: *const QbTrajectory,
    ensemble: usize,
    buf: *mut f64,
    len: usize,
) -> QbStatus {
    guarded(|| {
        let t = &deref(traj, "traj")?.inner;
        let series = t
            .energies
            .get(ensemble)
            .ok_or_else(|| Error::InvalidArgument {
                field: "ensemble".into(),
                reason: format!("index {ensemble} out of range"),
            })?;
        copy_out(series, buf, len)
    })
}

/// Mean energy over the final `window` fraction if it varies by less than `tol`.
///
/// # Safety
/// `traj` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_trajectory_steady_state(
    traj: *const QbTrajectory,
    ensemble: usize,
    window: f64,
    tol: f64,
    out: *mut f64,
) -> QbStatus {
    guarded(|| {
        let t = &deref(traj, "traj")?.inner;
        let v = steady_state_value(t, ensemble, window, tol)?;
        *deref_mut(out, "out")? = v;
        Ok(())
    })
}

/// Scaled time at which `ensemble` reaches `threshold` of its steady value.
///
/// # Safety
/// `traj` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_trajectory_charging_time(
    traj: *const QbTrajectory,
    ensemble: usize,
    threshold: f64,
    out: *mut f64,
) -> QbStatus {
    guarded(|| {
        let t = &deref(traj, "traj")?.inner;
        let v = charging_time(t, ensemble, threshold)?;
        *deref_mut(out, "out")? = v;
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_trajectory_free(traj: *mut QbTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
