//! C ABI over `simplex-infogeo`.
//!
//! Compositions and contrast matrices are opaque heap handles owned by the
//! caller and released with their `_free` function. Every fallible call
//! returns an [`SxiStatus`]; on failure [`sxi_last_error_message`] describes
//! the most recent error on the calling thread. Output buffers are written
//! only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use simplex_infogeo::aggregation::{self, PartSubset};
use simplex_infogeo::{divergence, duality, simplex, Composition, ContrastMatrix, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SxiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SxiContrastKind {
    Helmert = 0,
    Pivot = 1,
}

/// Opaque composition handle.
pub struct SxiComposition(Composition);

/// Opaque contrast-matrix handle.
pub struct SxiContrast(ContrastMatrix);

/// Pre- and post-amalgamation values and margins of one audit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SxiMonotonicityAudit {
    pub aitchison_before: f64,
    pub aitchison_after: f64,
    pub aitchison_margin: f64,
    pub kl_before: f64,
    pub kl_after: f64,
    pub kl_margin: f64,
    pub geomean_margin: f64,
    pub passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SxiStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DimensionMismatch { .. } | Error::BasePointMismatch => SxiStatus::DimensionMismatch,
            _ => SxiStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SxiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SxiStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SxiStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SxiStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out(values: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if len < values.len() {
        return Err(Failure(
            SxiStatus::BufferTooSmall,
            format!("output buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn write_scalar(value: f64, out: *mut f64) -> Result<(), Failure> {
    out.as_mut().map(|o| *o = value).ok_or_else(|| null("output"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sxi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; valid until the next
/// failing call on the same thread. Empty if nothing failed yet.
#[no_mangle]
pub extern "C" fn sxi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates a composition from `len` strictly positive parts.
///
/// # Safety
/// `parts` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_composition_new(
    parts: *const f64,
    len: usize,
    out: *mut *mut SxiComposition,
) -> SxiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let x = Composition::from_slice(input(parts, len, "parts")?)?;
        *out = Box::into_raw(Box::new(SxiComposition(x)));
        Ok(())
    })
}

/// # Safety
/// `c` must come from [`sxi_composition_new`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sxi_composition_free(c: *mut SxiComposition) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of parts, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sxi_composition_dim(c: *const SxiComposition) -> usize {
    c.as_ref().map_or(0, |c| c.0.dim())
}

/// Writes the closed parts.
///
/// # Safety
/// `c` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sxi_composition_parts(c: *const SxiComposition, out: *mut f64, len: usize) -> SxiStatus {
    guard(|| write_out(deref(c, "composition")?.0.closed().parts(), out, len))
}

/// Writes the `D` clr coordinates.
///
/// # Safety
/// `c` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sxi_clr(c: *const SxiComposition, out: *mut f64, len: usize) -> SxiStatus {
    guard(|| write_out(simplex::clr(&deref(c, "composition")?.0).coords(), out, len))
}

/// Writes the `D−1` alr coordinates, last part as reference.
///
/// # Safety
/// `c` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sxi_alr(c: *const SxiComposition, out: *mut f64, len: usize) -> SxiStatus {
    guard(|| write_out(simplex::alr(&deref(c, "composition")?.0).as_slice(), out, len))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_contrast_new(kind: SxiContrastKind, dim: usize, out: *mut *mut SxiContrast) -> SxiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = match kind {
            SxiContrastKind::Helmert => ContrastMatrix::helmert(dim)?,
            SxiContrastKind::Pivot => ContrastMatrix::pivot(dim)?,
        };
        *out = Box::into_raw(Box::new(SxiContrast(v)));
        Ok(())
    })
}

/// # Safety
/// `v` must come from [`sxi_contrast_new`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sxi_contrast_free(v: *mut SxiContrast) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Writes the `D−1` ilr coordinates under contrast `v`.
///
/// # Safety
/// Handles must be live and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sxi_ilr(
    c: *const SxiComposition,
    v: *const SxiContrast,
    out: *mut f64,
    len: usize,
) -> SxiStatus {
    guard(|| {
        let z = simplex::ilr(&deref(c, "composition")?.0, &deref(v, "contrast")?.0)?;
        write_out(&z.z, out, len)
    })
}

unsafe fn pair(
    x: *const SxiComposition,
    y: *const SxiComposition,
    out: *mut f64,
    f: impl FnOnce(&Composition, &Composition) -> simplex_infogeo::Result<f64>,
) -> SxiStatus {
    guard(|| {
        let value = f(&deref(x, "x")?.0, &deref(y, "y")?.0)?;
        write_scalar(value, out)
    })
}

/// Aitchison distance `d_A(x, y)`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_aitchison_distance(
    x: *const SxiComposition,
    y: *const SxiComposition,
    out: *mut f64,
) -> SxiStatus {
    pair(x, y, out, simplex::aitchison_distance)
}

/// Relative entropy `Σ xᵢ log(xᵢ/yᵢ)`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_kl(x: *const SxiComposition, y: *const SxiComposition, out: *mut f64) -> SxiStatus {
    pair(x, y, out, |x, y| Ok(divergence::kl(x, y)?.value))
}

/// Reverse relative entropy `Σ yᵢ log(yᵢ/xᵢ)`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_kl_reverse(
    x: *const SxiComposition,
    y: *const SxiComposition,
    out: *mut f64,
) -> SxiStatus {
    pair(x, y, out, |x, y| Ok(divergence::kl_reverse(x, y)?.value))
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_alpha_divergence(
    alpha: f64,
    x: *const SxiComposition,
    y: *const SxiComposition,
    out: *mut f64,
) -> SxiStatus {
    pair(x, y, out, |x, y| Ok(divergence::alpha_divergence(alpha, x, y)?.value))
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_hellinger(x: *const SxiComposition, y: *const SxiComposition, out: *mut f64) -> SxiStatus {
    pair(x, y, out, divergence::hellinger)
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_bhattacharyya(
    x: *const SxiComposition,
    y: *const SxiComposition,
    out: *mut f64,
) -> SxiStatus {
    pair(x, y, out, divergence::bhattacharyya)
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_fisher_distance(
    x: *const SxiComposition,
    y: *const SxiComposition,
    out: *mut f64,
) -> SxiStatus {
    pair(x, y, out, divergence::fisher_distance)
}

/// Box-Cox distance; `weights` holds `D` nonnegative values.
///
/// # Safety
/// Handles must be live, `weights` must hold `weights_len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_boxcox_distance(
    beta: f64,
    weights: *const f64,
    weights_len: usize,
    x: *const SxiComposition,
    y: *const SxiComposition,
    out: *mut f64,
) -> SxiStatus {
    let w = match input(weights, weights_len, "weights") {
        Ok(w) => w,
        Err(f) => return guard(|| Err(f)),
    };
    pair(x, y, out, |x, y| divergence::boxcox_distance(beta, w, x, y))
}

/// Legendre-Fenchel gap `ψ(θ_x) + φ(η_y) − θ_x·η_y`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_fenchel_gap(
    x: *const SxiComposition,
    y: *const SxiComposition,
    out: *mut f64,
) -> SxiStatus {
    pair(x, y, out, duality::fenchel_gap)
}

/// # Safety
/// `x` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_shannon_entropy(x: *const SxiComposition, out: *mut f64) -> SxiStatus {
    guard(|| write_scalar(aggregation::shannon_entropy(&deref(x, "x")?.0), out))
}

/// Audits information monotonicity when the 0-based parts in `subset` are
/// amalgamated.
///
/// # Safety
/// Handles must be live, `subset` must hold `subset_len` indices and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn sxi_monotonicity_audit(
    x: *const SxiComposition,
    y: *const SxiComposition,
    subset: *const usize,
    subset_len: usize,
    out: *mut SxiMonotonicityAudit,
) -> SxiStatus {
    guard(|| {
        let (x, y) = (&deref(x, "x")?.0, &deref(y, "y")?.0);
        if subset.is_null() && subset_len > 0 {
            return Err(null("subset"));
        }
        let idx = if subset_len == 0 { &[][..] } else { std::slice::from_raw_parts(subset, subset_len) };
        let a = aggregation::monotonicity_audit(x, y, &PartSubset::new(idx, x.dim())?)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = SxiMonotonicityAudit {
            aitchison_before: a.aitchison_before,
            aitchison_after: a.aitchison_after,
            aitchison_margin: a.aitchison_margin,
            kl_before: a.kl_before,
            kl_after: a.kl_after,
            kl_margin: a.kl_margin,
            geomean_margin: a.geomean_margin,
            passed: a.passed(),
        };
        Ok(())
    })
}
