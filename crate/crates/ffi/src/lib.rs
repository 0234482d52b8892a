//! C interface to the freqbeam simulator.
//!
//! Every fallible function returns a [`FreqbeamStatus`]; on failure the
//! message is available from [`freqbeam_last_error`] on the same thread.
//! Strings returned through out-pointers are owned by the caller and must be
//! released with [`freqbeam_string_free`]. Documents are opaque handles
//! released with [`freqbeam_document_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use freqbeam::device::{self, AcousticDrive, AomGeometry, MaterialTable};
use freqbeam::io::{oracle_report, parse_circuit, run_document, CircuitDocument};
use freqbeam::scenarios::{
    run_biexciton_fbs, run_biexciton_fbs_prime, run_erasure, run_hom, BiexcitonConfig,
    ErasureConfig,
};
use freqbeam::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqbeamStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The input failed parsing or validation.
    InvalidInput = 3,
    /// The input was valid but evaluation failed.
    RuntimeError = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// A parsed and validated circuit document.
pub struct FreqbeamDocument {
    doc: CircuitDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn classify(err: &Error) -> FreqbeamStatus {
    match err {
        Error::Document { .. }
        | Error::InvalidParameter { .. }
        | Error::UnknownMode(_)
        | Error::DuplicateMode(_)
        | Error::InvalidBin(_)
        | Error::InvalidComponent(_)
        | Error::RoutingCollision(_)
        | Error::FrequencyGap { .. } => FreqbeamStatus::InvalidInput,
        _ => FreqbeamStatus::RuntimeError,
    }
}

fn fail(err: Error) -> FreqbeamStatus {
    let status = classify(&err);
    set_error(err.to_string());
    status
}

/// Runs `body` with panics contained and the error slot maintained.
fn guard(body: impl FnOnce() -> FreqbeamStatus) -> FreqbeamStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FreqbeamStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, FreqbeamStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(FreqbeamStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|e| {
        set_error(format!("argument is not UTF-8: {e}"));
        FreqbeamStatus::InvalidUtf8
    })
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> FreqbeamStatus {
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            FreqbeamStatus::Ok
        }
        Err(_) => {
            set_error("output contains an interior NUL byte");
            FreqbeamStatus::RuntimeError
        }
    }
}

unsafe fn write_f64(out: *mut f64, value: Result<f64, Error>) -> FreqbeamStatus {
    match value {
        Ok(v) => {
            *out = v;
            FreqbeamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

macro_rules! non_null {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null pointer argument");
            return FreqbeamStatus::NullPointer;
        }
    };
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next freqbeam call on the same thread.
#[no_mangle]
pub extern "C" fn freqbeam_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn freqbeam_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    VERSION.as_ptr()
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from a freqbeam function and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a JSON circuit document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_document_parse(
    json: *const c_char,
    out: *mut *mut FreqbeamDocument,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(out);
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_circuit(text) {
            Ok(doc) => {
                *out = Box::into_raw(Box::new(FreqbeamDocument { doc }));
                FreqbeamStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a document. NULL is ignored.
///
/// # Safety
/// `doc` must come from [`freqbeam_document_parse`] and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_document_free(doc: *mut FreqbeamDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Runs a document and returns the result document as JSON.
///
/// # Safety
/// `doc` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_document_run(
    doc: *const FreqbeamDocument,
    out_json: *mut *mut c_char,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(doc, out_json);
        *out_json = ptr::null_mut();
        match run_document(&(*doc).doc) {
            Ok(r) => write_string(out_json, r.to_json()),
            Err(e) => fail(e),
        }
    })
}

/// Simulator-versus-permanent comparison for a herald-free document, plus
/// `random` Haar-random unitaries drawn from `seed`. Returns a JSON report.
///
/// # Safety
/// `doc` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_document_oracle(
    doc: *const FreqbeamDocument,
    random: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(doc, out_json);
        *out_json = ptr::null_mut();
        match oracle_report(&(*doc).doc, random, seed) {
            Ok(r) => write_string(
                out_json,
                serde_json::to_string_pretty(&r).expect("reports serialize"),
            ),
            Err(e) => fail(e),
        }
    })
}

/// Probability of one photon per output direction when two sources of
/// different frequency meet on a frequency beam splitter at angle `theta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_hom_coincidence(theta: f64, out: *mut f64) -> FreqbeamStatus {
    guard(|| {
        non_null!(out);
        write_f64(
            out,
            run_hom(&ErasureConfig::with_theta(theta)).map(|r| r.metrics["coincidence"]),
        )
    })
}

/// Which-way distinguishability after the frequency beam splitter.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_erasure_distinguishability(
    theta: f64,
    out: *mut f64,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(out);
        write_f64(
            out,
            run_erasure(&ErasureConfig::with_theta(theta))
                .map(|r| r.which_way_distinguishability.unwrap_or(1.0)),
        )
    })
}

/// Polarization concurrence of the rectified biexciton pair.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_biexciton_concurrence(
    theta: f64,
    phase: f64,
    out: *mut f64,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(out);
        let config = BiexcitonConfig {
            theta,
            phase,
            ..BiexcitonConfig::default()
        };
        write_f64(
            out,
            run_biexciton_fbs(&config).map(|r| r.concurrence.unwrap_or(0.0)),
        )
    })
}

/// Heralded success probability of the two-shifter rectifier with ideal
/// detectors.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_fbs_prime_success(
    shift_efficiency: f64,
    absorption: f64,
    out: *mut f64,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(out);
        let config = BiexcitonConfig {
            shift_efficiency,
            absorption,
            ..BiexcitonConfig::default()
        };
        write_f64(
            out,
            run_biexciton_fbs_prime(&config).map(|r| r.success_probability),
        )
    })
}

unsafe fn crystal(material: *const c_char) -> Result<device::CrystalParams, FreqbeamStatus> {
    let name = read_str(material)?;
    MaterialTable::builtin()
        .get(name)
        .map(|m| m.crystal())
        .map_err(fail)
}

/// AOM coupling constant (1/m) for a built-in material at acoustic
/// intensity `intensity` (W/m²) and optical angular frequency `omega` (rad/s).
///
/// # Safety
/// `material` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_device_eta(
    material: *const c_char,
    intensity: f64,
    omega: f64,
    out: *mut f64,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(out);
        let c = match crystal(material) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let drive = AcousticDrive {
            intensity,
            modulation_frequency: 1e9,
        };
        write_f64(out, device::coupling_eta(&c, &drive, omega))
    })
}

/// Interaction constant `R` (s) for a built-in material.
///
/// # Safety
/// `material` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_device_interaction_r(
    material: *const c_char,
    intensity: f64,
    length: f64,
    out: *mut f64,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(out);
        let c = match crystal(material) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let drive = AcousticDrive {
            intensity,
            modulation_frequency: 1e9,
        };
        write_f64(
            out,
            device::interaction_r(
                &c,
                &drive,
                &AomGeometry {
                    interaction_length: length,
                },
            ),
        )
    })
}

/// Exact and first-order ratio of the shifted fraction at `omega + delta`
/// to that at `omega` (angular frequencies, rad/s).
///
/// # Safety
/// `exact` and `first_order` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freqbeam_bandwidth_ratio(
    omega: f64,
    delta: f64,
    r: f64,
    exact: *mut f64,
    first_order: *mut f64,
) -> FreqbeamStatus {
    guard(|| {
        non_null!(exact, first_order);
        match device::bandwidth_ratio(omega, delta, r) {
            Ok(b) => {
                *exact = b.exact;
                *first_order = b.first_order;
                FreqbeamStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
