//! C ABI over the `smcov` evaluators.
//!
//! Every entry point returns an [`SmcovStatus`]; on anything other than
//! `SMCOV_STATUS_OK` a message is available from [`smcov_last_error`] on the
//! same thread. Results are written through out-pointers. Panics are caught
//! at the boundary and reported as `SMCOV_STATUS_PANIC`.

use smcov::montecarlo::{estimate_coverage, McSettings};
use smcov::rate::{ergodic_rate, rate_quantile, RateCutoff, Receiver, Scheme};
use smcov::{Error, NetworkConfig, PzfSplit};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmcovStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Numeric = 3,
    Infeasible = 4,
    Domain = 5,
    Panic = 6,
}

/// Receiver selector, passed as `uint32_t`. `m` arguments are read only for
/// `SMCOV_RECEIVER_PZF`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmcovReceiver {
    Pzf = 0,
    PzfOptimal = 1,
    Mmse = 2,
}

/// Rate scheme selector, passed as `uint32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmcovScheme {
    Sm = 0,
    Sst = 1,
}

/// Opaque network scenario.
pub struct SmcovScenario {
    config: NetworkConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SmcovStatus {
    match e {
        Error::InvalidConfig(_) | Error::SizeGuard { .. } => SmcovStatus::InvalidConfig,
        Error::Infeasible { .. } => SmcovStatus::Infeasible,
        Error::Domain(_) | Error::Pole(_) => SmcovStatus::Domain,
        _ => SmcovStatus::Numeric,
    }
}

struct Null;

/// Run `f`, translating errors and panics into a status.
fn guard<F>(f: F) -> SmcovStatus
where
    F: FnOnce() -> Result<Result<(), Error>, Null>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(Ok(()))) => {
            set_error("");
            SmcovStatus::Ok
        }
        Ok(Ok(Err(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Null)) => {
            set_error("null pointer argument");
            SmcovStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| p.downcast_ref::<&str>().copied())
                .unwrap_or("unknown panic");
            set_error(&format!("panic: {msg}"));
            SmcovStatus::Panic
        }
    }
}

unsafe fn handle<'a>(s: *const SmcovScenario) -> Result<&'a SmcovScenario, Null> {
    s.as_ref().ok_or(Null)
}

unsafe fn slot<'a, T>(p: *mut T) -> Result<&'a mut T, Null> {
    p.as_mut().ok_or(Null)
}

fn receiver(config: &NetworkConfig, rx: u32, m: usize) -> Result<Receiver, Error> {
    match rx {
        x if x == SmcovReceiver::Pzf as u32 => Ok(Receiver::Pzf(PzfSplit::new(config.n_t, config.n_r, m)?)),
        x if x == SmcovReceiver::PzfOptimal as u32 => Receiver::PzfOptimal.resolve(config),
        x if x == SmcovReceiver::Mmse as u32 => Ok(Receiver::Mmse),
        other => Err(Error::InvalidConfig(format!("unknown receiver selector {other}"))),
    }
}

/// Create a scenario. `*out_scenario` receives a handle to release with
/// [`smcov_scenario_free`].
///
/// # Safety
/// `out_scenario` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn smcov_scenario_new(
    lambda: f64,
    alpha: f64,
    sigma2: f64,
    n_t: usize,
    n_r: usize,
    out_scenario: *mut *mut SmcovScenario,
) -> SmcovStatus {
    guard(|| {
        let dst = slot(out_scenario)?;
        *dst = std::ptr::null_mut();
        Ok(NetworkConfig::new(lambda, alpha, sigma2, n_t, n_r).map(|config| {
            *dst = Box::into_raw(Box::new(SmcovScenario { config }));
        }))
    })
}

/// Release a scenario. Null is accepted.
///
/// # Safety
/// `scenario` must be null or a handle from [`smcov_scenario_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn smcov_scenario_free(scenario: *mut SmcovScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// PZF coverage `P(SINR > z)` with `m` cancelled groups.
///
/// # Safety
/// `scenario` must be a live handle; `out_p` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn smcov_coverage_pzf(
    scenario: *const SmcovScenario,
    m: usize,
    z: f64,
    out_p: *mut f64,
) -> SmcovStatus {
    guard(|| {
        let s = handle(scenario)?;
        let o = slot(out_p)?;
        Ok(PzfSplit::new(s.config.n_t, s.config.n_r, m)
            .and_then(|split| smcov::pzf::coverage(&s.config, split, z))
            .map(|p| *o = p))
    })
}

/// MMSE coverage `P(SINR > z)`.
///
/// # Safety
/// `scenario` must be a live handle; `out_p` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn smcov_coverage_mmse(scenario: *const SmcovScenario, z: f64, out_p: *mut f64) -> SmcovStatus {
    guard(|| {
        let s = handle(scenario)?;
        let o = slot(out_p)?;
        Ok(smcov::mmse::coverage(&s.config, z).map(|p| *o = p))
    })
}

/// Coverage at `n` thresholds: `out_p[i] = P(SINR > z[i])`.
///
/// # Safety
/// `z` must be readable and `out_p` writable for `n` doubles (either may be
/// null when `n == 0`).
#[no_mangle]
pub unsafe extern "C" fn smcov_coverage_curve(
    scenario: *const SmcovScenario,
    rx: u32,
    m: usize,
    z: *const f64,
    n: usize,
    out_p: *mut f64,
) -> SmcovStatus {
    guard(|| {
        let s = handle(scenario)?;
        if n == 0 {
            return Ok(Ok(()));
        }
        if z.is_null() || out_p.is_null() {
            return Err(Null);
        }
        let zs = std::slice::from_raw_parts(z, n);
        let dst = std::slice::from_raw_parts_mut(out_p, n);
        Ok(receiver(&s.config, rx, m).and_then(|r| {
            for (d, &zi) in dst.iter_mut().zip(zs) {
                *d = r.coverage(&s.config, zi)?;
            }
            Ok(())
        }))
    })
}

/// Per-stream ergodic rate `E[log2(1 + SINR)]` in bits/s/Hz.
///
/// # Safety
/// `scenario` must be a live handle; `out_rate` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn smcov_ergodic_rate(
    scenario: *const SmcovScenario,
    rx: u32,
    m: usize,
    out_rate: *mut f64,
) -> SmcovStatus {
    guard(|| {
        let s = handle(scenario)?;
        let o = slot(out_rate)?;
        Ok(receiver(&s.config, rx, m)
            .and_then(|r| ergodic_rate(|z| r.coverage(&s.config, z), RateCutoff::default()))
            .map(|v| *o = v))
    })
}

/// Rate quantile at level `q` in (0, 1). SM measures `N_t log2(1 + SINR)`,
/// SST measures `log2(1 + SINR)` of a single-stream link.
///
/// # Safety
/// `scenario` must be a live handle; `out_rate` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn smcov_rate_quantile(
    scenario: *const SmcovScenario,
    rx: u32,
    m: usize,
    scheme: u32,
    q: f64,
    out_rate: *mut f64,
) -> SmcovStatus {
    guard(|| {
        let s = handle(scenario)?;
        let o = slot(out_rate)?;
        let (scheme, config) = match scheme {
            x if x == SmcovScheme::Sm as u32 => (Scheme::Sm, s.config),
            x if x == SmcovScheme::Sst as u32 => (Scheme::Sst, NetworkConfig { n_t: 1, ..s.config }),
            other => return Ok(Err(Error::InvalidConfig(format!("unknown scheme selector {other}")))),
        };
        Ok(receiver(&config, rx, m)
            .and_then(|r| rate_quantile(scheme, |z| r.coverage(&config, z), config.n_t, q))
            .map(|v| *o = v))
    })
}

/// Optimal number of cancelled groups for the scenario.
///
/// # Safety
/// `scenario` must be a live handle; `out_m` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn smcov_optimal_m(scenario: *const SmcovScenario, out_m: *mut usize) -> SmcovStatus {
    guard(|| {
        let s = handle(scenario)?;
        let o = slot(out_m)?;
        Ok(smcov::pzf::optimal_m(&s.config).map(|m| *o = m))
    })
}

/// Monte Carlo coverage estimate and its standard error.
///
/// # Safety
/// `scenario` must be a live handle; both out-pointers must be valid for
/// writing.
#[no_mangle]
pub unsafe extern "C" fn smcov_mc_coverage(
    scenario: *const SmcovScenario,
    rx: u32,
    m: usize,
    z: f64,
    trials: usize,
    seed: u64,
    out_mean: *mut f64,
    out_std_error: *mut f64,
) -> SmcovStatus {
    guard(|| {
        let s = handle(scenario)?;
        let mean = slot(out_mean)?;
        let se = slot(out_std_error)?;
        Ok(receiver(&s.config, rx, m)
            .and_then(|r| estimate_coverage(&s.config, r, z, &McSettings::new(trials, seed)))
            .map(|e| {
                *mean = e.mean;
                *se = e.std_error;
            }))
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn smcov_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn smcov_version() -> *const c_char {
    const V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}
