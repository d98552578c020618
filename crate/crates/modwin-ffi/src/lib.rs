//! C ABI over the moderation-window engines.
//!
//! Conventions:
//! - Populations travel as JSON (the same schema the CLI reads); results come
//!   back as JSON or CSV strings allocated by this library.
//! - Every function returns a `ModwinStatus`; on failure `err_out` (when
//!   non-null) receives a message. All strings handed out must be released
//!   with `modwin_string_free`.
//! - Handles are opaque; free them with `modwin_population_free`.
//! - No call unwinds across the boundary.

use modwin::dynamics::{fair_limit_min_with, simulate, EngineCaps, PolicySchedule};
use modwin::error::Error;
use modwin::io;
use modwin::lcc::lcc_exact;
use modwin::schedule::Schedule;
use modwin::{Population, Window};
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes for every entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModwinStatus {
    Ok = 0,
    /// A null pointer or non-UTF-8 string was passed in.
    InvalidArgument = 1,
    /// The document parsed but violated a model invariant.
    Validation = 2,
    /// An engine cap was exceeded (state space too large).
    CapExceeded = 3,
    /// Library panic; a bug, not a usage error.
    Internal = 4,
}

/// Opaque population handle.
pub struct ModwinPopulation {
    pop: Population,
}

fn take_str<'a>(ptr: *const c_char) -> Result<&'a str, ModwinStatus> {
    if ptr.is_null() {
        return Err(ModwinStatus::InvalidArgument);
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| ModwinStatus::InvalidArgument)
}

fn give_string(s: String, out: *mut *mut c_char) {
    if out.is_null() {
        return;
    }
    let c = CString::new(s.replace('\0', " ")).expect("no interior nul after replacement");
    unsafe { *out = c.into_raw() };
}

fn fail(err: Error, err_out: *mut *mut c_char) -> ModwinStatus {
    let status = match err {
        Error::TooManyEligible { .. } | Error::StateCapExceeded { .. } => ModwinStatus::CapExceeded,
        _ => ModwinStatus::Validation,
    };
    give_string(err.to_string(), err_out);
    status
}

fn guarded(
    err_out: *mut *mut c_char,
    body: impl FnOnce() -> Result<(), ModwinStatus>,
) -> ModwinStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ModwinStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            give_string("internal panic".to_string(), err_out);
            ModwinStatus::Internal
        }
    }
}

/// Parse a population document. On success `*out` owns a new handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer; `err_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn modwin_population_parse(
    json: *const c_char,
    out: *mut *mut ModwinPopulation,
    err_out: *mut *mut c_char,
) -> ModwinStatus {
    guarded(err_out, || {
        if out.is_null() {
            return Err(ModwinStatus::InvalidArgument);
        }
        let text = take_str(json)?;
        match io::population_from_json(text) {
            Ok(pop) => {
                let handle = Box::new(ModwinPopulation { pop });
                unsafe { *out = Box::into_raw(handle) };
                Ok(())
            }
            Err(e) => Err(fail(e, err_out)),
        }
    })
}

/// Release a handle returned by `modwin_population_parse`.
///
/// # Safety
/// `pop` must be a pointer from `modwin_population_parse` or null; it must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn modwin_population_free(pop: *mut ModwinPopulation) {
    if !pop.is_null() {
        drop(unsafe { Box::from_raw(pop) });
    }
}

/// Number of users in the population; 0 for a null handle.
///
/// # Safety
/// `pop` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn modwin_population_len(pop: *const ModwinPopulation) -> usize {
    if pop.is_null() {
        return 0;
    }
    unsafe { &*pop }.pop.len()
}

/// Release a string returned by any call here.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn modwin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

fn window_from_json(text: &str) -> Result<Window, Error> {
    serde_json::from_str::<Window>(text).map_err(Error::Json)
}

/// Largest compatible community as JSON {method, size, members}.
///
/// # Safety
/// `pop` must be a live handle; `out_json` valid; `err_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn modwin_lcc_exact(
    pop: *const ModwinPopulation,
    out_json: *mut *mut c_char,
    err_out: *mut *mut c_char,
) -> ModwinStatus {
    guarded(err_out, || {
        if pop.is_null() || out_json.is_null() {
            return Err(ModwinStatus::InvalidArgument);
        }
        let handle = unsafe { &*pop };
        match lcc_exact(&handle.pop) {
            Ok(res) => {
                give_string(io::lcc_result_to_json(&res, None), out_json);
                Ok(())
            }
            Err(e) => Err(fail(e, err_out)),
        }
    })
}

/// Fair-limit analysis under a window given as JSON (`[lo, hi]` with null
/// for unbounded ends, or `"empty"`). Returns the report as JSON.
///
/// # Safety
/// `pop` must be a live handle; `window_json`, `out_json` valid; `err_out`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn modwin_fair_limit(
    pop: *const ModwinPopulation,
    window_json: *const c_char,
    out_json: *mut *mut c_char,
    err_out: *mut *mut c_char,
) -> ModwinStatus {
    guarded(err_out, || {
        if pop.is_null() || out_json.is_null() {
            return Err(ModwinStatus::InvalidArgument);
        }
        let handle = unsafe { &*pop };
        let window = match window_from_json(take_str(window_json)?) {
            Ok(w) => w,
            Err(e) => return Err(fail(e, err_out)),
        };
        match fair_limit_min_with(&handle.pop, &window, &EngineCaps::from_env()) {
            Ok(report) => {
                give_string(io::fair_limit_report_to_json(&report), out_json);
                Ok(())
            }
            Err(e) => Err(fail(e, err_out)),
        }
    })
}

/// Simulate a seeded random schedule under a window and return the trace as
/// CSV (`t,phase,actor,action,size`).
///
/// # Safety
/// `pop` must be a live handle; `window_json`, `out_csv` valid; `err_out`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn modwin_simulate_csv(
    pop: *const ModwinPopulation,
    window_json: *const c_char,
    seed: u64,
    horizon: u64,
    out_csv: *mut *mut c_char,
    err_out: *mut *mut c_char,
) -> ModwinStatus {
    guarded(err_out, || {
        if pop.is_null() || out_csv.is_null() {
            return Err(ModwinStatus::InvalidArgument);
        }
        let handle = unsafe { &*pop };
        let window = match window_from_json(take_str(window_json)?) {
            Ok(w) => w,
            Err(e) => return Err(fail(e, err_out)),
        };
        match simulate(
            &handle.pop,
            &PolicySchedule::Static(window),
            &Schedule::SeededRandom(seed),
            horizon,
        ) {
            Ok(trace) => {
                give_string(io::trace_to_csv(&trace), out_csv);
                Ok(())
            }
            Err(e) => Err(fail(e, err_out)),
        }
    })
}
