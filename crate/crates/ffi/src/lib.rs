//! C ABI for the ffsim simulator.
//!
//! Every function returns an [`FfsimStatus`]. Handles are opaque and must
//! be released with the matching `_free` function. On failure a message is
//! available from [`ffsim_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ffsim::config::SimConfig;
use ffsim::sim::{Outcome, SimResult, Simulation};

/// Status code returned by every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    SimError = 4,
    /// The simulation has already ended.
    Finished = 5,
    /// The requested value does not exist for this run.
    NotAvailable = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfsimOutcome {
    Success = 0,
    CollisionFail = 1,
    TimeoutFind = 2,
    TimeoutReturn = 3,
}

impl From<Outcome> for FfsimOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Success => FfsimOutcome::Success,
            Outcome::CollisionFail => FfsimOutcome::CollisionFail,
            Outcome::TimeoutFind => FfsimOutcome::TimeoutFind,
            Outcome::TimeoutReturn => FfsimOutcome::TimeoutReturn,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FfsimPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Simulation configuration.
pub struct FfsimConfig(SimConfig);

/// A simulation that can be stepped tick by tick.
pub struct FfsimSim(Simulation);

/// A finished run.
pub struct FfsimResult(SimResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn guard(f: impl FnOnce() -> Result<(), (FfsimStatus, String)>) -> FfsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FfsimStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside ffsim");
            FfsimStatus::Panic
        }
    }
}

fn null(what: &str) -> (FfsimStatus, String) {
    (FfsimStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FfsimStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FfsimStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message describing the last failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ffsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ffsim_config_default(out: *mut *mut FfsimConfig) -> FfsimStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(FfsimConfig(SimConfig::shipped())));
        Ok(())
    })
}

/// Parses a TOML config. Missing keys take default values.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_config_from_toml(toml: *const c_char, out: *mut *mut FfsimConfig) -> FfsimStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if toml.is_null() {
            return Err(null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| (FfsimStatus::InvalidArgument, format!("toml is not UTF-8: {e}")))?;
        let cfg = SimConfig::from_toml_str(text).map_err(|e| (FfsimStatus::ConfigError, e.to_string()))?;
        *out = Box::into_raw(Box::new(FfsimConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn ffsim_config_set_room(cfg: *mut FfsimConfig, room: u8) -> FfsimStatus {
    guard(|| {
        let cfg = out_ptr(cfg, "cfg")?;
        if !(1..=4).contains(&room) {
            return Err((FfsimStatus::InvalidArgument, format!("room {room} is out of range 1..=4")));
        }
        cfg.0.sim.room = room;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn ffsim_config_set_seed(cfg: *mut FfsimConfig, seed: u64) -> FfsimStatus {
    guard(|| {
        out_ptr(cfg, "cfg")?.0.sim.seed = seed;
        Ok(())
    })
}

/// Number of invariant violations in the config; 0 when valid. The
/// messages are joined into the last-error string when nonzero.
///
/// # Safety
/// `cfg` must be a live config handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_config_validate(cfg: *const FfsimConfig, count: *mut usize) -> FfsimStatus {
    guard(|| {
        let cfg = handle(cfg, "cfg")?;
        let count = out_ptr(count, "count")?;
        let v = cfg.0.validate();
        *count = v.len();
        if !v.is_empty() {
            set_error(v.join("\n"));
        }
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ffsim_config_free(cfg: *mut FfsimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs a whole simulation.
///
/// # Safety
/// `cfg` must be a live config handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_run(cfg: *const FfsimConfig, out: *mut *mut FfsimResult) -> FfsimStatus {
    guard(|| {
        let cfg = handle(cfg, "cfg")?;
        let out = out_ptr(out, "out")?;
        let r = ffsim::sim::run(cfg.0.clone()).map_err(sim_error)?;
        *out = Box::into_raw(Box::new(FfsimResult(r)));
        Ok(())
    })
}

fn sim_error(e: ffsim::sim::SimError) -> (FfsimStatus, String) {
    match e {
        ffsim::sim::SimError::Config(_) => (FfsimStatus::ConfigError, e.to_string()),
        ffsim::sim::SimError::Finished => (FfsimStatus::Finished, e.to_string()),
        _ => (FfsimStatus::SimError, e.to_string()),
    }
}

/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_result_outcome(res: *const FfsimResult, out: *mut FfsimOutcome) -> FfsimStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(res, "res")?.0.outcome.into();
        Ok(())
    })
}

/// Time the flame went out. `NotAvailable` if it never did.
///
/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_result_time_to_flame(res: *const FfsimResult, out: *mut f64) -> FfsimStatus {
    guard(|| {
        let res = handle(res, "res")?;
        let out = out_ptr(out, "out")?;
        *out = res.0.time_to_flame.ok_or((FfsimStatus::NotAvailable, "the flame was not put out".to_string()))?;
        Ok(())
    })
}

/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_result_total_time(res: *const FfsimResult, out: *mut f64) -> FfsimStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(res, "res")?.0.total_time;
        Ok(())
    })
}

/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_result_trajectory_len(res: *const FfsimResult, out: *mut usize) -> FfsimStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(res, "res")?.0.trajectory.len();
        Ok(())
    })
}

/// Pose of trajectory row `index`.
///
/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_result_trajectory_pose(
    res: *const FfsimResult,
    index: usize,
    out: *mut FfsimPose,
) -> FfsimStatus {
    guard(|| {
        let res = handle(res, "res")?;
        let out = out_ptr(out, "out")?;
        let s = res.0.trajectory.get(index).ok_or_else(|| {
            (FfsimStatus::InvalidArgument, format!("index {index} past trajectory length {}", res.0.trajectory.len()))
        })?;
        *out = FfsimPose { x: s.pose.x, y: s.pose.y, theta: s.pose.theta };
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ffsim_result_free(res: *mut FfsimResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// # Safety
/// `cfg` must be a live config handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_sim_new(cfg: *const FfsimConfig, out: *mut *mut FfsimSim) -> FfsimStatus {
    guard(|| {
        let cfg = handle(cfg, "cfg")?;
        let out = out_ptr(out, "out")?;
        let sim = Simulation::new(cfg.0.clone()).map_err(sim_error)?;
        *out = Box::into_raw(Box::new(FfsimSim(sim)));
        Ok(())
    })
}

/// Advances one tick. `done` is set once the run has ended.
///
/// # Safety
/// `sim` must be a live simulation handle; `done` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_sim_step(sim: *mut FfsimSim, done: *mut bool) -> FfsimStatus {
    guard(|| {
        let sim = out_ptr(sim, "sim")?;
        let done = out_ptr(done, "done")?;
        *done = sim.0.step().map_err(sim_error)?.is_some();
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live simulation handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_sim_pose(sim: *const FfsimSim, out: *mut FfsimPose) -> FfsimStatus {
    guard(|| {
        let p = handle(sim, "sim")?.0.pose();
        *out_ptr(out, "out")? = FfsimPose { x: p.x, y: p.y, theta: p.theta };
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live simulation handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_sim_time(sim: *const FfsimSim, out: *mut f64) -> FfsimStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(sim, "sim")?.0.time();
        Ok(())
    })
}

/// Consumes the simulation and returns its result so far. The simulation
/// handle is freed even on failure.
///
/// # Safety
/// `sim` must be a live simulation handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffsim_sim_finish(sim: *mut FfsimSim, out: *mut *mut FfsimResult) -> FfsimStatus {
    guard(|| {
        if sim.is_null() {
            return Err(null("sim"));
        }
        let sim = Box::from_raw(sim);
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(FfsimResult(sim.0.into_result())));
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ffsim_sim_free(sim: *mut FfsimSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
