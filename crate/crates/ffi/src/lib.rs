//! C interface to holoflow.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `hf_*_new`/`hf_*_analyze` call and released with the matching `hf_*_free`.
//! Functions return an [`HfStatus`]; on failure the message is kept per
//! thread and can be copied out with [`hf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use holoflow::compactify::{infinity_critical_points, khat, EquilibriumKind, InfinityEquilibrium};
use holoflow::ctime::TimePath;
use holoflow::flow::{detect_periodic, integrate, PeriodicOptions};
use holoflow::ode::{Options, Termination, Trajectory};
use holoflow::poly::ComplexPoly;
use holoflow::xi::{build_system, continue_root, ContinueOptions, ZeroTable};
use holoflow::{Complex64, Error};

/// Result codes. `HF_STATUS_OK` is zero; everything else is a failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IdentZeroEquator = 3,
    DegenerateEigenvector = 4,
    NotASaddle = 5,
    NotUnit = 6,
    StepUnderflow = 7,
    TooManySteps = 8,
    BlowUp = 9,
    SingularOnPath = 10,
    CenterOnOrbit = 11,
    NotBetweenCenters = 12,
    Parse = 13,
    Monotonicity = 14,
    AnchorIsZero = 15,
    BranchPointHit = 16,
    IndexOutOfRange = 17,
    Panic = 18,
}

impl From<&Error> for HfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::IdentZeroEquator => HfStatus::IdentZeroEquator,
            Error::DegenerateEigenvector => HfStatus::DegenerateEigenvector,
            Error::NotASaddle => HfStatus::NotASaddle,
            Error::NotUnit(_) => HfStatus::NotUnit,
            Error::StepUnderflow { .. } => HfStatus::StepUnderflow,
            Error::TooManySteps { .. } => HfStatus::TooManySteps,
            Error::BlowUp { .. } => HfStatus::BlowUp,
            Error::SingularOnPath(_) => HfStatus::SingularOnPath,
            Error::CenterOnOrbit => HfStatus::CenterOnOrbit,
            Error::NotBetweenCenters => HfStatus::NotBetweenCenters,
            Error::Parse { .. } => HfStatus::Parse,
            Error::Monotonicity { .. } => HfStatus::Monotonicity,
            Error::AnchorIsZero => HfStatus::AnchorIsZero,
            Error::BranchPointHit { .. } => HfStatus::BranchPointHit,
            Error::Invalid(_) => HfStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: HfStatus, msg: impl Into<String>) -> HfStatus {
    set_error(msg);
    status
}

fn from_err(e: Error) -> HfStatus {
    fail(HfStatus::from(&e), e.to_string())
}

/// Runs `f`, turning a panic into `HF_PANIC`.
fn guard<F: FnOnce() -> HfStatus>(f: F) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == HfStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(HfStatus::Panic, "internal panic"),
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hf_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn hf_status_name(status: HfStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        HfStatus::Ok => b"ok\0",
        HfStatus::NullPointer => b"null_pointer\0",
        HfStatus::InvalidArgument => b"invalid\0",
        HfStatus::IdentZeroEquator => b"ident_zero_equator\0",
        HfStatus::DegenerateEigenvector => b"degenerate_eigenvector\0",
        HfStatus::NotASaddle => b"not_a_saddle\0",
        HfStatus::NotUnit => b"not_unit\0",
        HfStatus::StepUnderflow => b"step_underflow\0",
        HfStatus::TooManySteps => b"too_many_steps\0",
        HfStatus::BlowUp => b"blow_up\0",
        HfStatus::SingularOnPath => b"singular_on_path\0",
        HfStatus::CenterOnOrbit => b"center_on_orbit\0",
        HfStatus::NotBetweenCenters => b"not_between_centers\0",
        HfStatus::Parse => b"parse\0",
        HfStatus::Monotonicity => b"monotonicity\0",
        HfStatus::AnchorIsZero => b"anchor_is_zero\0",
        HfStatus::BranchPointHit => b"branch_point_hit\0",
        HfStatus::IndexOutOfRange => b"index_out_of_range\0",
        HfStatus::Panic => b"panic\0",
    };
    CStr::from_bytes_with_nul(s).expect("NUL-terminated").as_ptr()
}

/// Opaque polynomial handle.
pub struct HfPoly {
    inner: ComplexPoly,
}

/// Builds `Σ (re[k] + i·im[k]) z^k` from `n` ascending coefficients.
///
/// # Safety
/// `re` and `im` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_poly_new(re: *const f64, im: *const f64, n: usize, out: *mut *mut HfPoly) -> HfStatus {
    guard(|| {
        if re.is_null() || im.is_null() || out.is_null() {
            return fail(HfStatus::NullPointer, "null argument");
        }
        if n == 0 {
            return fail(HfStatus::InvalidArgument, "a polynomial needs at least one coefficient");
        }
        let re = std::slice::from_raw_parts(re, n);
        let im = std::slice::from_raw_parts(im, n);
        if re.iter().chain(im).any(|v| !v.is_finite()) {
            return fail(HfStatus::InvalidArgument, "coefficients must be finite");
        }
        let coeffs = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        *out = Box::into_raw(Box::new(HfPoly { inner: ComplexPoly::new(coeffs) }));
        HfStatus::Ok
    })
}

/// # Safety
/// `p` must be null or a handle from [`hf_poly_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_poly_free(p: *mut HfPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Degree after trailing zero coefficients are dropped; 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_poly_degree(p: *const HfPoly) -> usize {
    p.as_ref().map_or(0, |p| p.inner.degree())
}

/// # Safety
/// `p` must be a live handle; `out_re`/`out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_poly_eval(p: *const HfPoly, re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> HfStatus {
    guard(|| {
        let (Some(p), false, false) = (p.as_ref(), out_re.is_null(), out_im.is_null()) else {
            return fail(HfStatus::NullPointer, "null argument");
        };
        let v = p.inner.eval(Complex64::new(re, im));
        *out_re = v.re;
        *out_im = v.im;
        HfStatus::Ok
    })
}

/// Kind of an equilibrium at infinity.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfEquilibriumKind {
    Saddle = 0,
    Node = 1,
    DegenerateOther = 2,
}

/// One critical point at infinity, copied out of an [`HfInfinity`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfEquilibrium {
    pub p_x: f64,
    pub p_y: f64,
    pub alpha: f64,
    pub eig0_re: f64,
    pub eig0_im: f64,
    pub eig1_re: f64,
    pub eig1_im: f64,
    pub kind: HfEquilibriumKind,
}

/// Opaque result of an infinity analysis.
pub struct HfInfinity {
    eqs: Vec<InfinityEquilibrium>,
    khat: i32,
}

/// # Safety
/// `p` must be a live polynomial handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_infinity_analyze(p: *const HfPoly, out: *mut *mut HfInfinity) -> HfStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), out.is_null()) else {
            return fail(HfStatus::NullPointer, "null argument");
        };
        let field = p.inner.to_real_field();
        let eqs = match infinity_critical_points(&field) {
            Ok(e) => e,
            Err(e) => return from_err(e),
        };
        let k = match khat(&field) {
            Ok(k) => k.khat,
            Err(e) => return from_err(e),
        };
        *out = Box::into_raw(Box::new(HfInfinity { eqs, khat: k }));
        HfStatus::Ok
    })
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_infinity_free(h: *mut HfInfinity) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_infinity_count(h: *const HfInfinity) -> usize {
    h.as_ref().map_or(0, |h| h.eqs.len())
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_infinity_khat(h: *const HfInfinity) -> i32 {
    h.as_ref().map_or(0, |h| h.khat)
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_infinity_get(h: *const HfInfinity, index: usize, out: *mut HfEquilibrium) -> HfStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else {
            return fail(HfStatus::NullPointer, "null argument");
        };
        let Some(e) = h.eqs.get(index) else {
            return fail(HfStatus::IndexOutOfRange, format!("index {index} out of range 0..{}", h.eqs.len()));
        };
        *out = HfEquilibrium {
            p_x: e.p[0],
            p_y: e.p[1],
            alpha: e.alpha,
            eig0_re: e.eigenvalues[0].re,
            eig0_im: e.eigenvalues[0].im,
            eig1_re: e.eigenvalues[1].re,
            eig1_im: e.eigenvalues[1].im,
            kind: match e.kind {
                EquilibriumKind::Saddle => HfEquilibriumKind::Saddle,
                EquilibriumKind::Node => HfEquilibriumKind::Node,
                EquilibriumKind::DegenerateOther => HfEquilibriumKind::DegenerateOther,
            },
        };
        HfStatus::Ok
    })
}

/// How an integration ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfTermination {
    TimeLimit = 0,
    Escaped = 1,
    PeriodClosed = 2,
    StalledAtEquilibrium = 3,
    Interrupted = 4,
}

/// Opaque trajectory handle.
pub struct HfTrajectory {
    inner: Trajectory,
}

/// Integrates `z' = p(z)` from `z0` over `[t0, t1]` with relative tolerance
/// `rtol` (0 selects the default).
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_integrate(
    p: *const HfPoly,
    z0_re: f64,
    z0_im: f64,
    t0: f64,
    t1: f64,
    rtol: f64,
    out: *mut *mut HfTrajectory,
) -> HfStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), out.is_null()) else {
            return fail(HfStatus::NullPointer, "null argument");
        };
        let mut opts = Options::default();
        if rtol != 0.0 {
            opts.rtol = rtol;
        }
        match integrate(&p.inner, Complex64::new(z0_re, z0_im), (t0, t1), &opts) {
            Ok(tr) => {
                *out = Box::into_raw(Box::new(HfTrajectory { inner: tr }));
                HfStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_trajectory_free(h: *mut HfTrajectory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_trajectory_len(h: *const HfTrajectory) -> usize {
    h.as_ref().map_or(0, |h| h.inner.states.len())
}

/// # Safety
/// `h` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_trajectory_sample(h: *const HfTrajectory, index: usize, t: *mut f64, re: *mut f64, im: *mut f64) -> HfStatus {
    guard(|| {
        let (Some(h), false, false, false) = (h.as_ref(), t.is_null(), re.is_null(), im.is_null()) else {
            return fail(HfStatus::NullPointer, "null argument");
        };
        let Some(z) = h.inner.states.get(index) else {
            return fail(HfStatus::IndexOutOfRange, format!("index {index} out of range 0..{}", h.inner.states.len()));
        };
        *t = h.inner.times[index];
        *re = z.re;
        *im = z.im;
        HfStatus::Ok
    })
}

/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_trajectory_termination(h: *const HfTrajectory) -> HfTermination {
    match h.as_ref().map(|h| h.inner.termination) {
        Some(Termination::Escaped { .. }) => HfTermination::Escaped,
        Some(Termination::PeriodClosed { .. }) => HfTermination::PeriodClosed,
        Some(Termination::StalledAtEquilibrium) => HfTermination::StalledAtEquilibrium,
        Some(Termination::Interrupted) => HfTermination::Interrupted,
        Some(Termination::TimeLimit) | None => HfTermination::TimeLimit,
    }
}

/// Periodic orbit summary; `periodic == 0` leaves the other fields zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HfOrbit {
    pub periodic: i32,
    pub period: f64,
    pub gap: f64,
    pub center_re: f64,
    pub center_im: f64,
    pub winding: i64,
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_detect_periodic(p: *const HfPoly, z0_re: f64, z0_im: f64, out: *mut HfOrbit) -> HfStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), out.is_null()) else {
            return fail(HfStatus::NullPointer, "null argument");
        };
        match detect_periodic(&p.inner, Complex64::new(z0_re, z0_im), &PeriodicOptions::default()) {
            Ok(Some(o)) => {
                *out = HfOrbit {
                    periodic: 1,
                    period: o.period,
                    gap: o.gap,
                    center_re: o.center.re,
                    center_im: o.center.im,
                    winding: o.winding,
                };
                HfStatus::Ok
            }
            Ok(None) => {
                *out = HfOrbit::default();
                HfStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Continues the root of the zero-product approximant built from the first
/// `m/2` ordinates, anchored at `z0`, along the straight path `0 → T`.
///
/// # Safety
/// `ordinates` must point to `n` readable doubles; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_xi_continue(
    ordinates: *const f64,
    n: usize,
    m: usize,
    z0_re: f64,
    z0_im: f64,
    t_re: f64,
    t_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HfStatus {
    guard(|| {
        if ordinates.is_null() || out_re.is_null() || out_im.is_null() {
            return fail(HfStatus::NullPointer, "null argument");
        }
        let table = match ZeroTable::new(std::slice::from_raw_parts(ordinates, n).to_vec()) {
            Ok(t) => t,
            Err(e) => return from_err(e),
        };
        let sys = match build_system(&table, m, Complex64::new(z0_re, z0_im)) {
            Ok(s) => s,
            Err(e) => return from_err(e),
        };
        match continue_root(&sys, &TimePath::straight(Complex64::new(t_re, t_im)), &ContinueOptions::default()) {
            Ok(run) => {
                let z = run.end().1;
                *out_re = z.re;
                *out_im = z.im;
                HfStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}
