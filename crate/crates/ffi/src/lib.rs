//! C ABI over the isospec library.
//!
//! Every entry point returns an [`IsospecStatus`]; on failure a message is
//! kept per thread and read back with [`isospec_last_error`]. Experiments are
//! opaque handles created from TOML and released with
//! [`isospec_experiment_free`]. Strings handed out by the library are
//! released with [`isospec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use isospec::cocycle::{free_laplacian_le, lyapunov, uh_detect, Classification};
use isospec::config::ExperimentConfig;
use isospec::kam::{reduce, schrodinger_embedding, trace_residual};
use isospec::output::trace_json_lines;
use isospec::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsospecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Domain = 4,
    Numerical = 5,
    SmallDenominator = 6,
    Config = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsospecClass {
    Uh = 0,
    NotUh = 1,
    Undecided = 2,
}

/// Opaque experiment handle.
pub struct IsospecExperiment {
    config: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> IsospecStatus {
    match err {
        Error::InvalidInput(_) => IsospecStatus::InvalidInput,
        Error::Domain(_) | Error::ParabolicConstant(_) => IsospecStatus::Domain,
        Error::Numerical(_) | Error::FixedPoint(_) => IsospecStatus::Numerical,
        Error::SmallDenominator { .. } => IsospecStatus::SmallDenominator,
        Error::Config(_) => IsospecStatus::Config,
        Error::Io(_) => IsospecStatus::Io,
    }
}

struct Failure(IsospecStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> IsospecStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IsospecStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            IsospecStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(IsospecStatus::NullPointer, format!("{what} is null"))
}

unsafe fn experiment<'a>(handle: *const IsospecExperiment) -> Result<&'a ExperimentConfig, Failure> {
    handle.as_ref().map(|h| &h.config).ok_or_else(|| null("experiment"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn isospec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn isospec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse and validate a TOML configuration. `toml` may be an empty string
/// for the built-in defaults.
///
/// # Safety
/// `toml` must be a valid NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_experiment_from_toml(
    toml: *const c_char,
    out: *mut *mut IsospecExperiment,
) -> IsospecStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| Failure(IsospecStatus::InvalidUtf8, e.to_string()))?;
        let config = ExperimentConfig::from_toml(text)?;
        write(out, Box::into_raw(Box::new(IsospecExperiment { config })), "out")
    })
}

/// # Safety
/// `handle` must come from [`isospec_experiment_from_toml`] and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn isospec_experiment_free(handle: *mut IsospecExperiment) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Hex SHA-256 digest of the canonical configuration. Release with
/// [`isospec_string_free`].
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_experiment_digest(
    handle: *const IsospecExperiment,
    out: *mut *mut c_char,
) -> IsospecStatus {
    guard(|| {
        let digest = experiment(handle)?.digest()?;
        write(out, into_c_string(digest)?, "out")
    })
}

/// Lyapunov exponent at energy `re + i im` with phase shift `eps`.
///
/// # Safety
/// `handle` must be live; `value` and `std_error` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_lyapunov(
    handle: *const IsospecExperiment,
    re: f64,
    im: f64,
    eps: f64,
    value: *mut f64,
    std_error: *mut f64,
) -> IsospecStatus {
    guard(|| {
        let cfg = experiment(handle)?;
        let est = lyapunov(&cfg.cocycle(Complex64::new(re, im), eps)?, &cfg.lyapunov_options())?;
        write(value, est.value, "value")?;
        write(std_error, est.std_error, "std_error")
    })
}

/// Uniform hyperbolicity verdict and exponent at one energy.
///
/// # Safety
/// `handle` must be live; `verdict` and `lyapunov_out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_uh_classify(
    handle: *const IsospecExperiment,
    re: f64,
    im: f64,
    eps: f64,
    verdict: *mut IsospecClass,
    lyapunov_out: *mut f64,
) -> IsospecStatus {
    guard(|| {
        let cfg = experiment(handle)?;
        let spec = cfg.cocycle(Complex64::new(re, im), eps)?;
        let v = uh_detect(&spec, &cfg.lyapunov_options(), &cfg.uh_options())?;
        let c = match v.classification {
            Classification::Uh => IsospecClass::Uh,
            Classification::NotUh => IsospecClass::NotUh,
            Classification::Undecided => IsospecClass::Undecided,
        };
        write(verdict, c, "verdict")?;
        write(lyapunov_out, v.lyapunov, "lyapunov_out")
    })
}

/// Exponent of the free operator, `log|E/2 + sqrt(E^2/4 - 1)|` on the
/// larger branch.
#[no_mangle]
pub extern "C" fn isospec_free_laplacian_le(re: f64, im: f64) -> f64 {
    free_laplacian_le(Complex64::new(re, im))
}

/// Reducibility trace at one energy as JSON lines, the last line being a
/// summary. Release with [`isospec_string_free`].
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_kam_trace(
    handle: *const IsospecExperiment,
    re: f64,
    im: f64,
    out: *mut *mut c_char,
) -> IsospecStatus {
    guard(|| {
        let cfg = experiment(handle)?;
        let spec = cfg.cocycle(Complex64::new(re, im), 0.0)?;
        let embedding = schrodinger_embedding(&spec, cfg.kam.aperture)?;
        let opts = cfg.kam_options();
        let trace = reduce(&embedding.problem, &opts)?;
        let text = trace_json_lines(&trace, trace_residual(&trace, &embedding.problem, &opts.step))?;
        write(out, into_c_string(text)?, "out")
    })
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(IsospecStatus::InvalidUtf8, e.to_string()))
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn isospec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
