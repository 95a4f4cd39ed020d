//! C ABI over the botlc simulator.
//!
//! Scenarios and trajectories are opaque handles owned by the library and
//! released with the matching `_free` function. Every fallible call returns
//! a [`BotlcStatus`]; on failure a message is available from
//! [`botlc_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use botlc::analysis::{invariant_report, MonitorConfig};
use botlc::sim::{Scenario, Trajectory};

/// Status codes. The first four match the `botlc` exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BotlcStatus {
    Ok = 0,
    InvariantFailure = 1,
    ConfigError = 2,
    RuntimeAbort = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    Io = 6,
    IndexOutOfRange = 7,
    Panic = 8,
}

pub struct BotlcScenario(Scenario);

pub struct BotlcTrajectory(Trajectory);

/// One recorded sample, flattened.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BotlcSample {
    pub t: f64,
    pub agent_x: f64,
    pub agent_y: f64,
    pub target_x: f64,
    pub target_y: f64,
    pub x_hat_x: f64,
    pub x_hat_y: f64,
    pub d: f64,
    pub d_hat: f64,
    pub delta: f64,
    pub xtilde_norm: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub theta: f64,
    /// Diagnostic bits, as in the `flags` CSV column.
    pub flags: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: BotlcStatus, msg: impl Into<String>) -> BotlcStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> BotlcStatus) -> BotlcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(BotlcStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, BotlcStatus> {
    if p.is_null() {
        return Err(fail(BotlcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BotlcStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn boxed_scenario(r: botlc::Result<Scenario>, out: *mut *mut BotlcScenario) -> BotlcStatus {
    match r {
        Ok(s) => {
            unsafe { *out = Box::into_raw(Box::new(BotlcScenario(s))) };
            BotlcStatus::Ok
        }
        Err(botlc::Error::Io(e)) => fail(BotlcStatus::Io, e.to_string()),
        Err(e) => fail(BotlcStatus::ConfigError, e.to_string()),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn botlc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next botlc call on the same thread.
#[no_mangle]
pub extern "C" fn botlc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parse and validate a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn botlc_scenario_from_toml(toml: *const c_char, out: *mut *mut BotlcScenario) -> BotlcStatus {
    guard(|| {
        if out.is_null() {
            return fail(BotlcStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        match str_arg(toml, "toml") {
            Ok(text) => boxed_scenario(Scenario::from_toml_str(text), out),
            Err(s) => s,
        }
    })
}

/// Load a scenario file, or a bundled scenario by name.
///
/// # Safety
/// `path_or_name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn botlc_scenario_load(path_or_name: *const c_char, out: *mut *mut BotlcScenario) -> BotlcStatus {
    guard(|| {
        if out.is_null() {
            return fail(BotlcStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        match str_arg(path_or_name, "path_or_name") {
            Ok(p) => boxed_scenario(Scenario::load(p), out),
            Err(s) => s,
        }
    })
}

/// # Safety
/// `scenario` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn botlc_scenario_free(scenario: *mut BotlcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Override the horizon of a scenario.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn botlc_scenario_set_t_end(scenario: *mut BotlcScenario, t_end_s: f64) -> BotlcStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(BotlcStatus::NullPointer, "scenario is null");
        };
        let mut next = s.0.clone();
        next.integrator.t_end_s = t_end_s;
        match next.validate() {
            Ok(()) => {
                s.0 = next;
                BotlcStatus::Ok
            }
            Err(e) => fail(BotlcStatus::ConfigError, e.to_string()),
        }
    })
}

/// Simulate a scenario.
///
/// On `BOTLC_STATUS_RUNTIME_ABORT` the partial trajectory is still stored in
/// `out` and must be freed.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn botlc_run(scenario: *const BotlcScenario, out: *mut *mut BotlcTrajectory) -> BotlcStatus {
    guard(|| {
        if out.is_null() {
            return fail(BotlcStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(s) = scenario.as_ref() else {
            return fail(BotlcStatus::NullPointer, "scenario is null");
        };
        let traj = match s.0.run() {
            Ok(t) => t,
            Err(e) => return fail(BotlcStatus::ConfigError, e.to_string()),
        };
        let abort = traj.abort.clone();
        *out = Box::into_raw(Box::new(BotlcTrajectory(traj)));
        match abort {
            Some(a) => fail(BotlcStatus::RuntimeAbort, format!("aborted at t = {} s: {}", a.t, a.reason)),
            None => BotlcStatus::Ok,
        }
    })
}

/// Run the invariant monitors with the scenario's check settings.
///
/// Returns `BOTLC_STATUS_OK` when every applicable check passes and
/// `BOTLC_STATUS_INVARIANT_FAILURE` otherwise; the failing checks are listed
/// in the error message.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn botlc_check(scenario: *const BotlcScenario, traj: *const BotlcTrajectory) -> BotlcStatus {
    guard(|| {
        let (Some(s), Some(t)) = (scenario.as_ref(), traj.as_ref()) else {
            return fail(BotlcStatus::NullPointer, "handle is null");
        };
        let report = invariant_report(&t.0, &MonitorConfig::for_trajectory(&t.0, s.0.checks.clone()));
        if report.all_passed() {
            BotlcStatus::Ok
        } else {
            let failed: Vec<_> = report
                .entries
                .iter()
                .filter(|e| e.verdict == botlc::analysis::Verdict::Fail)
                .map(|e| e.name)
                .collect();
            fail(BotlcStatus::InvariantFailure, format!("failed checks: {}", failed.join(", ")))
        }
    })
}

/// Number of samples; 0 for NULL.
///
/// # Safety
/// `traj` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn botlc_trajectory_len(traj: *const BotlcTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Copy sample `index` into `out`.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn botlc_trajectory_sample(
    traj: *const BotlcTrajectory,
    index: usize,
    out: *mut BotlcSample,
) -> BotlcStatus {
    guard(|| {
        let (Some(t), Some(out)) = (traj.as_ref(), out.as_mut()) else {
            return fail(BotlcStatus::NullPointer, "handle is null");
        };
        let Some(s) = t.0.samples.get(index) else {
            return fail(
                BotlcStatus::IndexOutOfRange,
                format!("index {index} out of range for {} samples", t.0.len()),
            );
        };
        *out = BotlcSample {
            t: s.t,
            agent_x: s.agent.x,
            agent_y: s.agent.y,
            target_x: s.target.x,
            target_y: s.target.y,
            x_hat_x: s.x_hat.x,
            x_hat_y: s.x_hat.y,
            d: s.d,
            d_hat: s.d_hat,
            delta: s.delta,
            xtilde_norm: s.xtilde_norm,
            u_x: s.u.x,
            u_y: s.u.y,
            theta: s.theta,
            flags: s.flags.bits(),
        };
        BotlcStatus::Ok
    })
}

/// Write the trajectory in the CSV format of `botlc run`.
///
/// # Safety
/// `traj` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn botlc_trajectory_write_csv(traj: *const BotlcTrajectory, path: *const c_char) -> BotlcStatus {
    guard(|| {
        let Some(t) = traj.as_ref() else {
            return fail(BotlcStatus::NullPointer, "trajectory is null");
        };
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let mut bytes = Vec::new();
        let written = botlc::io::write_trajectory(&t.0, &mut bytes)
            .and_then(|()| botlc::io::write_atomic(Path::new(path), &bytes));
        match written {
            Ok(()) => BotlcStatus::Ok,
            Err(e) => fail(BotlcStatus::Io, e.to_string()),
        }
    })
}

/// # Safety
/// `traj` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn botlc_trajectory_free(traj: *mut BotlcTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
