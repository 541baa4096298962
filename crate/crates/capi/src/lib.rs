//! C interface for the manifold-hdr estimator.
//!
//! Objects cross the boundary as opaque handles created and destroyed by
//! paired `_new`/`_free` functions. Every fallible call returns an
//! [`MhdrStatus`]; on failure a thread-local message is retrievable with
//! [`mhdr_last_error_message`] until the next failing call on the same
//! thread. Out-parameters are written only on `MHDR_STATUS_OK`.
//!
//! The header is generated at build time into `include/manifold_hdr.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use manifold_hdr::density::{
    cv_select_concentration, default_cv_grid, DensityModel, KernelConfig,
    KernelDensity,
};
use manifold_hdr::hdr::{
    ball_union_components, estimate_hdr, estimate_hdr_by_probability,
    split_sample_with_values, HdrEstimate,
};
use manifold_hdr::pipeline::{read_sample_csv, write_estimate_json};
use manifold_hdr::{Error, ManifoldKind, Sample};

/// Status of a C-interface call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MhdrStatus {
    Ok = 0,
    /// Invalid configuration (bad manifold tag, nonpositive radius, ...).
    ConfigError = 1,
    /// Invalid data (manifold mismatch, non-finite coordinate, ...).
    DomainError = 2,
    /// A data file could not be read or interpreted.
    IngestionError = 3,
    /// Filesystem or serialization failure.
    IoError = 4,
    /// A required pointer argument was null.
    NullPointer = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// The implementation panicked; state may be stale but memory is safe.
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> MhdrStatus {
    match err {
        Error::Config(_) => MhdrStatus::ConfigError,
        Error::Domain(_) => MhdrStatus::DomainError,
        Error::Ingestion(_) => MhdrStatus::IngestionError,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => MhdrStatus::IoError,
    }
}

fn fail(err: Error) -> MhdrStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Runs a fallible body behind a panic guard.
fn guarded(body: impl FnOnce() -> MhdrStatus) -> MhdrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MhdrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, MhdrStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(MhdrStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        MhdrStatus::InvalidUtf8
    })
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], MhdrStatus> {
    if ptr.is_null() {
        set_error("null coordinate buffer");
        return Err(MhdrStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

macro_rules! deref_or_null {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_error("null handle");
                return MhdrStatus::NullPointer;
            }
        }
    };
}

macro_rules! out_or_null {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => {
                set_error("null out-parameter");
                return MhdrStatus::NullPointer;
            }
        }
    };
}

/// A point sample on a manifold.
pub struct MhdrSample {
    inner: Sample,
}

/// A density model: a kernel density estimate over a sample.
pub struct MhdrDensity {
    inner: DensityModel,
}

/// A fitted highest-density-region estimate.
pub struct MhdrEstimate {
    inner: HdrEstimate,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mhdr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread, empty when none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mhdr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates an empty sample on the named manifold
/// (`"circle"`, `"sphere2"`, `"torus2"`, `"torus3"`, ..., `"euclidean2"`, ...).
///
/// # Safety
/// `manifold_tag` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mhdr_sample_new(
    manifold_tag: *const c_char,
    out: *mut *mut MhdrSample,
) -> MhdrStatus {
    guarded(|| {
        let out = out_or_null!(out);
        let tag = match str_arg(manifold_tag) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let kind: ManifoldKind = match tag.parse() {
            Ok(kind) => kind,
            Err(err) => return fail(err),
        };
        *out = Box::into_raw(Box::new(MhdrSample {
            inner: Sample::new(kind),
        }));
        MhdrStatus::Ok
    })
}

/// Appends one point given as `len` coordinates.
///
/// # Safety
/// `coords` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn mhdr_sample_push(
    sample: *mut MhdrSample,
    coords: *const f64,
    len: usize,
) -> MhdrStatus {
    guarded(|| {
        let sample = match unsafe { sample.as_mut() } {
            Some(r) => r,
            None => {
                set_error("null handle");
                return MhdrStatus::NullPointer;
            }
        };
        let coords = match slice_arg(coords, len) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match sample.inner.push(coords) {
            Ok(()) => MhdrStatus::Ok,
            Err(err) => fail(err),
        }
    })
}

/// Reads a sample CSV (header `manifold,dim,c1..`).
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mhdr_sample_read_csv(
    path: *const c_char,
    out: *mut *mut MhdrSample,
) -> MhdrStatus {
    guarded(|| {
        let out = out_or_null!(out);
        let path = match str_arg(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match read_sample_csv(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MhdrSample { inner }));
                MhdrStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mhdr_sample_len(sample: *const MhdrSample) -> usize {
    unsafe { sample.as_ref() }.map_or(0, |s| s.inner.len())
}

/// Coordinates per point; 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mhdr_sample_ambient_dim(sample: *const MhdrSample) -> usize {
    unsafe { sample.as_ref() }.map_or(0, |s| s.inner.kind().ambient_dim())
}

/// Copies the flat coordinate buffer (`len * ambient_dim` doubles) into
/// `buf`, which must hold at least `buf_len` doubles.
///
/// # Safety
/// `buf` must point to `buf_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mhdr_sample_coords(
    sample: *const MhdrSample,
    buf: *mut f64,
    buf_len: usize,
) -> MhdrStatus {
    guarded(|| {
        let sample = deref_or_null!(sample);
        if buf.is_null() {
            set_error("null coordinate buffer");
            return MhdrStatus::NullPointer;
        }
        let coords = sample.inner.coords();
        if buf_len < coords.len() {
            set_error("coordinate buffer too small");
            return MhdrStatus::DomainError;
        }
        unsafe { std::ptr::copy_nonoverlapping(coords.as_ptr(), buf, coords.len()) };
        MhdrStatus::Ok
    })
}

/// Frees a sample handle; null is a no-op.
///
/// # Safety
/// `sample` must be a pointer from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mhdr_sample_free(sample: *mut MhdrSample) {
    if !sample.is_null() {
        drop(unsafe { Box::from_raw(sample) });
    }
}

/// Fits a kernel density estimate over the sample. A nonpositive
/// `concentration` selects it by leave-one-out cross-validation.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mhdr_kde_new(
    sample: *const MhdrSample,
    concentration: f64,
    out: *mut *mut MhdrDensity,
) -> MhdrStatus {
    guarded(|| {
        let out = out_or_null!(out);
        let sample = deref_or_null!(sample);
        let points = &sample.inner;
        let family = KernelConfig::family_for(points.kind());
        let kappa = if concentration > 0.0 {
            concentration
        } else {
            match cv_select_concentration(points, family, &default_cv_grid(family)) {
                Ok(k) => k,
                Err(err) => return fail(err),
            }
        };
        let config = match KernelConfig::new(family, kappa) {
            Ok(c) => c,
            Err(err) => return fail(err),
        };
        match KernelDensity::new(points.clone(), config) {
            Ok(kde) => {
                *out = Box::into_raw(Box::new(MhdrDensity {
                    inner: DensityModel::Kernel(kde),
                }));
                MhdrStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Evaluates the density at one point given as `len` coordinates.
///
/// # Safety
/// `coords` must point to `len` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mhdr_density_pdf(
    density: *const MhdrDensity,
    coords: *const f64,
    len: usize,
    out: *mut f64,
) -> MhdrStatus {
    guarded(|| {
        let out = out_or_null!(out);
        let density = deref_or_null!(density);
        let coords = match slice_arg(coords, len) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut probe = Sample::new(density.inner.kind());
        if let Err(err) = probe.push(coords) {
            return fail(err);
        }
        match density.inner.evaluate_sample(&probe) {
            Ok(values) => {
                *out = values[0];
                MhdrStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Frees a density handle; null is a no-op.
///
/// # Safety
/// `density` must be a pointer from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mhdr_density_free(density: *mut MhdrDensity) {
    if !density.is_null() {
        drop(unsafe { Box::from_raw(density) });
    }
}

/// Estimates the region holding probability mass `1 - gamma` using balls
/// of radius `r_n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_by_probability(
    sample: *const MhdrSample,
    density: *const MhdrDensity,
    gamma: f64,
    r_n: f64,
    out: *mut *mut MhdrEstimate,
) -> MhdrStatus {
    guarded(|| {
        let out = out_or_null!(out);
        let sample = deref_or_null!(sample);
        let density = deref_or_null!(density);
        match estimate_hdr_by_probability(&sample.inner, &density.inner, gamma, r_n) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MhdrEstimate { inner }));
                MhdrStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Estimates the region where the density exceeds `lambda` using balls of
/// radius `r_n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_at_level(
    sample: *const MhdrSample,
    density: *const MhdrDensity,
    lambda: f64,
    r_n: f64,
    out: *mut *mut MhdrEstimate,
) -> MhdrStatus {
    guarded(|| {
        let out = out_or_null!(out);
        let sample = deref_or_null!(sample);
        let density = deref_or_null!(density);
        let result = density
            .inner
            .evaluate_sample(&sample.inner)
            .and_then(|values| split_sample_with_values(&sample.inner, values, lambda))
            .and_then(|labeled| estimate_hdr(&labeled, r_n));
        match result {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MhdrEstimate { inner }));
                MhdrStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Tests whether the point given as `len` coordinates lies in the region:
/// writes 1 or 0 to `out`.
///
/// # Safety
/// `coords` must point to `len` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_contains(
    estimate: *const MhdrEstimate,
    coords: *const f64,
    len: usize,
    out: *mut i32,
) -> MhdrStatus {
    guarded(|| {
        let out = out_or_null!(out);
        let estimate = deref_or_null!(estimate);
        let coords = match slice_arg(coords, len) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if coords.len() != estimate.inner.kind().ambient_dim() {
            set_error("coordinate count does not match the manifold");
            return MhdrStatus::DomainError;
        }
        let mut owned = coords.to_vec();
        if let Err(err) = estimate.inner.kind().canonicalize(&mut owned) {
            return fail(err);
        }
        *out = i32::from(estimate.inner.contains_coords(&owned));
        MhdrStatus::Ok
    })
}

/// Threshold the estimate was built at; NaN for a null handle.
///
/// # Safety
/// `estimate` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_lambda(estimate: *const MhdrEstimate) -> f64 {
    unsafe { estimate.as_ref() }.map_or(f64::NAN, |e| e.inner.lambda())
}

/// Ball radius of the estimate; NaN for a null handle.
///
/// # Safety
/// `estimate` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_radius(estimate: *const MhdrEstimate) -> f64 {
    unsafe { estimate.as_ref() }.map_or(f64::NAN, |e| e.inner.radius())
}

/// Number of selected ball centers; 0 for a null handle.
///
/// # Safety
/// `estimate` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_center_count(estimate: *const MhdrEstimate) -> usize {
    unsafe { estimate.as_ref() }.map_or(0, |e| e.inner.set().centers().len())
}

/// Number of connected components; 0 for a null handle or empty estimate.
///
/// # Safety
/// `estimate` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_component_count(estimate: *const MhdrEstimate) -> usize {
    unsafe { estimate.as_ref() }.map_or(0, |e| ball_union_components(e.inner.set()).0)
}

/// Writes the estimate as JSON.
///
/// # Safety
/// `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_write_json(
    estimate: *const MhdrEstimate,
    path: *const c_char,
) -> MhdrStatus {
    guarded(|| {
        let estimate = deref_or_null!(estimate);
        let path = match str_arg(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match write_estimate_json(Path::new(path), &estimate.inner) {
            Ok(()) => MhdrStatus::Ok,
            Err(err) => fail(err),
        }
    })
}

/// Frees an estimate handle; null is a no-op.
///
/// # Safety
/// `estimate` must be a pointer from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mhdr_estimate_free(estimate: *mut MhdrEstimate) {
    if !estimate.is_null() {
        drop(unsafe { Box::from_raw(estimate) });
    }
}
