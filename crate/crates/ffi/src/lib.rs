//! C ABI for `cavlab`: curve handles, region classification, predicted
//! exponents, log-log fits, the dyadic series test and the stationary point.
//!
//! Every function returns a [`CavStatus`]; on failure a message is kept per
//! thread and can be read with [`cav_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use cavlab::curves::{series_lemma21, Curve, SeriesVerdict};
use cavlab::oscillatory::critical_point;
use cavlab::pq_geometry::{necessary_region_contains, predicted_exponent, ExponentPair, FamilyKind, Omega};
use cavlab::sharpness::{fit_exponent, Sample};
use cavlab::Error;

/// Status codes; the nonzero values match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavStatus {
    Ok = 0,
    Internal = 1,
    Parse = 2,
    Unsupported = 3,
    Resolution = 4,
    NotAdmissible = 5,
    /// Null pointer, out-of-range argument or failed precondition.
    InvalidArgument = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavFamily {
    RectI = 0,
    BallIi = 1,
    AdjointIii = 2,
    TiltedIv = 3,
    Thm3Ball = 4,
}

impl From<CavFamily> for FamilyKind {
    fn from(f: CavFamily) -> Self {
        match f {
            CavFamily::RectI => FamilyKind::RectI,
            CavFamily::BallIi => FamilyKind::BallII,
            CavFamily::AdjointIii => FamilyKind::AdjointIII,
            CavFamily::TiltedIv => FamilyKind::TiltedIV,
            CavFamily::Thm3Ball => FamilyKind::Thm3Ball,
        }
    }
}

/// Opaque curve handle.
pub struct CavCurve {
    inner: Curve,
}

/// Bits of `CavRegionVerdict::violated`.
pub const CAV_VIOLATES_I: u32 = 1;
pub const CAV_VIOLATES_II: u32 = 2;
pub const CAV_VIOLATES_III: u32 = 4;
pub const CAV_VIOLATES_IV: u32 = 8;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavRegionVerdict {
    pub in_trapezium: bool,
    pub in_triangle: bool,
    pub in_theorem1: bool,
    pub in_necessary: bool,
    /// `1 + (1 + omega)(1/q - 1/p)`; NaN for an infinitely flat curve.
    pub line_value: f64,
    /// Violated necessary conditions as `CAV_VIOLATES_*` bits.
    pub violated: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub std_error: f64,
    pub consistent: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CavStatus {
    match e.exit_code() {
        2 => CavStatus::Parse,
        3 => CavStatus::Unsupported,
        4 => CavStatus::Resolution,
        5 => CavStatus::NotAdmissible,
        _ => match e {
            Error::Domain(_) | Error::Precondition(_) | Error::InvalidCurve(_) => CavStatus::InvalidArgument,
            _ => CavStatus::Internal,
        },
    }
}

fn fail(status: CavStatus, msg: impl Into<String>) -> CavStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, records its error and catches panics.
fn guard(f: impl FnOnce() -> Result<(), CavStatus>) -> CavStatus {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(())) => CavStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CavStatus::Internal, "panic inside cavlab"),
    }
}

fn lift<T>(r: cavlab::Result<T>) -> Result<T, CavStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, CavStatus> {
    p.as_mut().ok_or_else(|| fail(CavStatus::InvalidArgument, "null output pointer"))
}

unsafe fn curve_ref<'a>(c: *const CavCurve) -> Result<&'a Curve, CavStatus> {
    c.as_ref().map(|c| &c.inner).ok_or_else(|| fail(CavStatus::InvalidArgument, "null curve handle"))
}

fn pair(inv_p: f64, inv_q: f64) -> Result<ExponentPair, CavStatus> {
    lift(ExponentPair::real(inv_p, inv_q))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cav_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a curve description such as `"kind=power d=2"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_curve_parse(spec: *const c_char, out: *mut *mut CavCurve) -> CavStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        if spec.is_null() {
            return Err(fail(CavStatus::InvalidArgument, "null curve description"));
        }
        let s = CStr::from_ptr(spec).to_str().map_err(|_| fail(CavStatus::Parse, "curve description is not UTF-8"))?;
        let curve: Curve = lift(s.parse())?;
        *out = Box::into_raw(Box::new(CavCurve { inner: curve }));
        Ok(())
    })
}

/// Releases a handle from [`cav_curve_parse`]; null is ignored.
///
/// # Safety
/// `curve` must come from [`cav_curve_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cav_curve_free(curve: *mut CavCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// `gamma^(order)(t)` for `t` in the curve's domain.
///
/// # Safety
/// `curve` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_curve_eval(curve: *const CavCurve, t: f64, order: usize, out: *mut f64) -> CavStatus {
    guard(|| {
        let (c, out) = (curve_ref(curve)?, out_ref(out)?);
        *out = lift(c.eval(t, order))?;
        Ok(())
    })
}

/// Flatness exponent at the origin; `INFINITY` for infinitely flat curves.
///
/// # Safety
/// `curve` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_curve_omega(curve: *const CavCurve, out: *mut f64) -> CavStatus {
    guard(|| {
        let (c, out) = (curve_ref(curve)?, out_ref(out)?);
        *out = lift(c.omega())?.value.finite().unwrap_or(f64::INFINITY);
        Ok(())
    })
}

/// Classifies `(1/p, 1/q)`; `omega` may be `INFINITY`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_region_classify(
    inv_p: f64,
    inv_q: f64,
    omega: f64,
    out: *mut CavRegionVerdict,
) -> CavStatus {
    guard(|| {
        let out = out_ref(out)?;
        let w = if omega == f64::INFINITY {
            Omega::Infinite
        } else if omega > 0.0 && omega.is_finite() {
            Omega::Finite(omega)
        } else {
            return Err(fail(CavStatus::InvalidArgument, format!("omega {omega} must be positive")));
        };
        let v = necessary_region_contains(&pair(inv_p, inv_q)?, w);
        let bit = |c: &str| match c {
            "(i)" => CAV_VIOLATES_I,
            "(ii)" => CAV_VIOLATES_II,
            "(iii)" => CAV_VIOLATES_III,
            "(iv)" => CAV_VIOLATES_IV,
            _ => 0,
        };
        *out = CavRegionVerdict {
            in_trapezium: v.in_trapezium,
            in_triangle: v.in_triangle,
            in_theorem1: v.in_theorem1,
            in_necessary: v.in_necessary,
            line_value: v.line_value.unwrap_or(f64::NAN),
            violated: v.violated_conditions.iter().map(|c| bit(c)).fold(0, |a, b| a | b),
        };
        Ok(())
    })
}

/// Exponent of `eps` predicted for a family at `(1/p, 1/q)`.
///
/// # Safety
/// `curve` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_predicted_exponent(
    family: CavFamily,
    inv_p: f64,
    inv_q: f64,
    curve: *const CavCurve,
    out: *mut f64,
) -> CavStatus {
    guard(|| {
        let (c, out) = (curve_ref(curve)?, out_ref(out)?);
        *out = lift(predicted_exponent(family.into(), &pair(inv_p, inv_q)?, c))?;
        Ok(())
    })
}

/// Least-squares fit of `ln ratio` against `ln eps` over `n >= 4` samples
/// with `eps` strictly decreasing geometrically.
///
/// # Safety
/// `eps` and `ratio` must point to `n` values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cav_fit_exponent(
    eps: *const f64,
    ratio: *const f64,
    n: usize,
    predicted: f64,
    tolerance: f64,
    out: *mut CavFit,
) -> CavStatus {
    guard(|| {
        let out = out_ref(out)?;
        if eps.is_null() || ratio.is_null() {
            return Err(fail(CavStatus::InvalidArgument, "null sample array"));
        }
        let (e, r) = (std::slice::from_raw_parts(eps, n), std::slice::from_raw_parts(ratio, n));
        let samples: Vec<Sample> = e.iter().zip(r).map(|(&eps, &ratio)| Sample { eps, ratio }).collect();
        let f = lift(fit_exponent(&samples, predicted, tolerance))?;
        *out = CavFit { slope: f.slope, intercept: f.intercept, std_error: f.stderr, consistent: f.consistent };
        Ok(())
    })
}

/// Dyadic series `sum_{j<=0} 2^j |2^j gamma(2^j)|^(1/q - 1/p)` summed down
/// to `j_min <= -32`. Sets `*convergent` and, when convergent, `*value`
/// (NaN otherwise).
///
/// # Safety
/// `curve` must be a live handle; `convergent` and `value` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cav_series_lemma21(
    curve: *const CavCurve,
    inv_p: f64,
    inv_q: f64,
    j_min: i32,
    convergent: *mut bool,
    value: *mut f64,
) -> CavStatus {
    guard(|| {
        let (c, conv, val) = (curve_ref(curve)?, out_ref(convergent)?, out_ref(value)?);
        match lift(series_lemma21(c, &pair(inv_p, inv_q)?, j_min))? {
            SeriesVerdict::Convergent { value } => {
                *conv = true;
                *val = value;
            }
            SeriesVerdict::Divergent => {
                *conv = false;
                *val = f64::NAN;
            }
        }
        Ok(())
    })
}

/// Solves `Gamma_j'(t0) = -xi1/xi2` on `(1/2, 2)`.
///
/// # Safety
/// `curve` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_critical_point(
    curve: *const CavCurve,
    j: i32,
    xi1: f64,
    xi2: f64,
    out: *mut f64,
) -> CavStatus {
    guard(|| {
        let (c, out) = (curve_ref(curve)?, out_ref(out)?);
        *out = lift(critical_point(c, j, [xi1, xi2]))?;
        Ok(())
    })
}
