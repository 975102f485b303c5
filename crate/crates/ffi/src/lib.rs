//! C interface to `resonance-rigidity`.
//!
//! Every fallible function returns an [`RrStatus`]. On failure,
//! [`rr_last_error_message`] describes the error until the next call on the
//! same thread. Resonance sets are opaque handles: obtain one from
//! [`rr_ball_resonances`] and release it with [`rr_resonance_set_free`].
//! Panics never cross the boundary; they surface as `RR_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use num_complex::Complex64;
use resonance_rigidity::heat::{calibrate_from_set, CalibrationConstants, HeatPipelineConfig};
use resonance_rigidity::rigidity::{identify, invariants_from_resonances};
use resonance_rigidity::scattering::DirectDeterminant;
use resonance_rigidity::{geometry, radial, wave, BoundaryCondition, GeometricInvariants, ResonanceSet};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    OutOfRange = 4,
    Panic = 5,
}

/// Boundary condition codes accepted wherever a `bc` argument appears.
pub const RR_BC_NEUMANN: i32 = 0;
pub const RR_BC_DIRICHLET: i32 = 1;

/// Opaque resonance set.
pub struct RrResonanceSet(ResonanceSet);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrResonance {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u64,
    pub mode: u32,
}

/// `m` and `rho` are meaningful only when `is_union_of_equal_balls` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrIdentifyResult {
    pub is_union_of_equal_balls: bool,
    pub m: u32,
    pub rho: f64,
    pub m_hat: f64,
    pub rho_hat: f64,
    pub cs_defect: f64,
    pub af_defect: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

type Failure = (RrStatus, String);

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            RrStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RrStatus::Panic
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    (RrStatus::InvalidArgument, message.into())
}

fn solver(e: impl std::fmt::Display) -> Failure {
    (RrStatus::SolverFailure, e.to_string())
}

fn check_ball(d: u32, rho: f64) -> Result<(), Failure> {
    if d < 3 || d % 2 == 0 {
        return Err(invalid(format!("dimension must be odd and at least 3, got {d}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {rho}")));
    }
    Ok(())
}

fn boundary(bc: i32) -> Result<BoundaryCondition, Failure> {
    match bc {
        RR_BC_NEUMANN => Ok(BoundaryCondition::Neumann),
        RR_BC_DIRICHLET => Ok(BoundaryCondition::Dirichlet),
        other => Err(invalid(format!("unknown boundary condition code {other}"))),
    }
}

fn out_ref<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller guarantees `ptr` is null or valid for writes.
    unsafe { ptr.as_mut() }.ok_or((RrStatus::NullPointer, format!("`{name}` is null")))
}

fn set_ref<'a>(set: *const RrResonanceSet) -> Result<&'a ResonanceSet, Failure> {
    // SAFETY: non-null handles come from `rr_ball_resonances` and are live.
    unsafe { set.as_ref() }
        .map(|s| &s.0)
        .ok_or((RrStatus::NullPointer, "resonance set handle is null".into()))
}

fn triple_in(ptr: *const f64, name: &str) -> Result<[f64; 3], Failure> {
    if ptr.is_null() {
        return Err((RrStatus::NullPointer, format!("`{name}` is null")));
    }
    // SAFETY: non-null, and the caller provides three readable doubles.
    Ok(unsafe { [*ptr, *ptr.add(1), *ptr.add(2)] })
}

fn triple_out(ptr: *mut f64, name: &str, values: [f64; 3]) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err((RrStatus::NullPointer, format!("`{name}` is null")));
    }
    // SAFETY: non-null, and the caller provides room for three doubles.
    unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), ptr, 3) };
    Ok(())
}

/// Library version, including the resonance-cache revision. Static storage.
#[no_mangle]
pub extern "C" fn rr_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(resonance_rigidity::VERSION).expect("no interior nul"))
        .as_ptr()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn rr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Resonances of the exterior of `B(rho)` in `R^d` for modes `0..=l_max`.
/// On success `*out` owns a new handle.
#[no_mangle]
pub extern "C" fn rr_ball_resonances(
    d: u32,
    rho: f64,
    l_max: u32,
    bc: i32,
    out: *mut *mut RrResonanceSet,
) -> RrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        check_ball(d, rho)?;
        let bc = boundary(bc)?;
        let set = radial::ball_resonances(d, rho, l_max, bc).map_err(solver)?;
        *out = Box::into_raw(Box::new(RrResonanceSet(set)));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `set` must be null or a handle from [`rr_ball_resonances`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rr_resonance_set_free(set: *mut RrResonanceSet) {
    if !set.is_null() {
        // SAFETY: guaranteed by the caller.
        drop(unsafe { Box::from_raw(set) });
    }
}

/// Number of distinct resonances.
#[no_mangle]
pub extern "C" fn rr_resonance_set_len(set: *const RrResonanceSet, out: *mut usize) -> RrStatus {
    guard(|| {
        *out_ref(out, "out")? = set_ref(set)?.len();
        Ok(())
    })
}

/// Sum of multiplicities.
#[no_mangle]
pub extern "C" fn rr_resonance_set_total_multiplicity(set: *const RrResonanceSet, out: *mut u64) -> RrStatus {
    guard(|| {
        *out_ref(out, "out")? = set_ref(set)?.total_multiplicity();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn rr_resonance_set_get(set: *const RrResonanceSet, index: usize, out: *mut RrResonance) -> RrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let set = set_ref(set)?;
        let r = set
            .iter()
            .nth(index)
            .ok_or((RrStatus::OutOfRange, format!("index {index} of {}", set.len())))?;
        *out = RrResonance {
            re: r.value.re,
            im: r.value.im,
            multiplicity: r.multiplicity,
            mode: r.mode,
        };
        Ok(())
    })
}

/// Scattering determinant of `B(rho)` at `lambda`, as the product of mode
/// eigenvalues over `l <= l_max`.
#[no_mangle]
pub extern "C" fn rr_det_s_direct(
    d: u32,
    rho: f64,
    l_max: u32,
    bc: i32,
    lambda_re: f64,
    lambda_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RrStatus {
    guard(|| {
        let re = out_ref(out_re, "out_re")?;
        let im = out_ref(out_im, "out_im")?;
        check_ball(d, rho)?;
        let det = DirectDeterminant::new(d, rho, l_max, boundary(bc)?).map_err(solver)?;
        let v = det.evaluate(Complex64::new(lambda_re, lambda_im)).map_err(solver)?.value;
        (*re, *im) = (v.re, v.im);
        Ok(())
    })
}

/// `A1, A2, A3` of `m` disjoint spheres of radius `rho`, written to `out[0..3]`.
#[no_mangle]
pub extern "C" fn rr_sphere_invariants(d: u32, rho: f64, m: u32, out: *mut f64) -> RrStatus {
    guard(|| {
        let inv = geometry::sphere_invariants(d, rho, m).map_err(|e| invalid(e.to_string()))?;
        triple_out(out, "out", inv.as_array())
    })
}

/// Equal-ball decision on `invariants[0..3]` with relative tolerance `tol`.
#[no_mangle]
pub extern "C" fn rr_identify(d: u32, invariants: *const f64, tol: f64, out: *mut RrIdentifyResult) -> RrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let [a1, a2, a3] = triple_in(invariants, "invariants")?;
        let r = identify(&GeometricInvariants::new(d, a1, a2, a3), tol).map_err(|e| invalid(e.to_string()))?;
        *out = RrIdentifyResult {
            is_union_of_equal_balls: r.is_union_of_equal_balls,
            m: r.m.unwrap_or(0),
            rho: r.rho.unwrap_or(f64::NAN),
            m_hat: r.m_hat,
            rho_hat: r.rho_hat,
            cs_defect: r.cs_defect,
            af_defect: r.af_defect.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Dimension constants from a Neumann ball set of radius `radius`, with the
/// default heat pipeline; written to `alpha_out[0..3]`.
#[no_mangle]
pub extern "C" fn rr_calibrate(set: *const RrResonanceSet, radius: f64, alpha_out: *mut f64) -> RrStatus {
    guard(|| {
        let set = set_ref(set)?;
        let cal = calibrate_from_set(set, radius, &HeatPipelineConfig::default()).map_err(solver)?;
        triple_out(alpha_out, "alpha_out", cal.alpha)
    })
}

/// Boundary invariants read off `set` with constants `alpha[0..3]`; written
/// to `out[0..3]`.
#[no_mangle]
pub extern "C" fn rr_recover_invariants(set: *const RrResonanceSet, alpha: *const f64, out: *mut f64) -> RrStatus {
    guard(|| {
        let set = set_ref(set)?;
        let alpha = triple_in(alpha, "alpha")?;
        let cal = CalibrationConstants::new(set.dimension, alpha).map_err(|e| invalid(e.to_string()))?;
        let inv = invariants_from_resonances(set, &cal, &HeatPipelineConfig::default()).map_err(solver)?;
        triple_out(out, "out", inv.as_array())
    })
}

/// Gaussian-smoothed wave trace `Σ mult e^{-iλ|t|} e^{-ε²|λ|²/2}`.
#[no_mangle]
pub extern "C" fn rr_smoothed_wave_trace(
    set: *const RrResonanceSet,
    t: f64,
    eps: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RrStatus {
    guard(|| {
        let re = out_ref(out_re, "out_re")?;
        let im = out_ref(out_im, "out_im")?;
        let set = set_ref(set)?;
        if !(eps > 0.0 && eps.is_finite() && t.is_finite()) {
            return Err(invalid("need finite t and positive eps"));
        }
        let u = wave::smoothed_wave_trace(set, t, eps);
        (*re, *im) = (u.re, u.im);
        Ok(())
    })
}
