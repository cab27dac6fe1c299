//! C ABI for the detonation stability library.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `_free`. Every fallible call returns a [`ZndStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`znd_last_error`]. Panics are caught at the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use znd_core::cli::config::ScanConfig;
use znd_core::evans::{evans, EvansOptions};
use znd_core::linsys::turning_point;
use znd_core::profile::{reference_config, DetSpeed, ProfileRep, ProfileType, ShockSetup, XCoord};
use znd_core::thermo::GasModel;
use znd_core::{c64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZndStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Domain = 3,
    Numerical = 4,
    Construction = 5,
    Panic = 6,
}

/// Steady profile handle.
pub struct ZndProfile {
    rep: ProfileRep,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZndProfileInfo {
    pub det_speed: f64,
    pub d_cj: f64,
    pub mu: f64,
    pub zeta0_abs: f64,
    pub zeta_inf_abs: f64,
    /// 1 when c₀² − u² decreases strictly along the reaction zone.
    pub type_d: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZndEvansResult {
    pub v_re: f64,
    pub v_im: f64,
    pub l1_re: f64,
    pub l1_im: f64,
    pub theta1_residual: f64,
    /// θ(0) at unit norm, interleaved (re, im) × 5.
    pub theta0: [f64; 10],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZndTurningPoint {
    pub x: f64,
    /// 1 when the turning point sits at x = +∞ (then `x` is +∞ too).
    pub at_infinity: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ZndStatus {
    match e {
        Error::Config(_) => ZndStatus::Config,
        Error::Domain(_) | Error::Pole(_) => ZndStatus::Domain,
        Error::Numerical(_) => ZndStatus::Numerical,
        Error::Construction(_) => ZndStatus::Construction,
    }
}

/// Run `f`, translating errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), (ZndStatus, String)>>(f: F) -> ZndStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZndStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {m}"));
            ZndStatus::Panic
        }
    }
}

fn lib(e: Error) -> (ZndStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ZndStatus, String) {
    (ZndStatus::NullPointer, format!("{what} is null"))
}

fn store_profile(rep: ProfileRep, out: *mut *mut ZndProfile) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(ZndProfile { rep })) };
}

/// Build the reference type-D profile.
#[no_mangle]
pub extern "C" fn znd_profile_reference(out: *mut *mut ZndProfile) -> ZndStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (g, s) = reference_config();
        store_profile(ProfileRep::build(&g, &s).map_err(lib)?, out);
        Ok(())
    })
}

/// Build a profile from gas constants and an overdrive f = (D/D_CJ)² > 1.
#[no_mangle]
pub extern "C" fn znd_profile_new(
    gamma: f64,
    q_release: f64,
    e_act: f64,
    k_rate: f64,
    v_minus: f64,
    p_minus: f64,
    overdrive: f64,
    out: *mut *mut ZndProfile,
) -> ZndStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = GasModel::new(gamma, q_release, e_act, k_rate).map_err(lib)?;
        let s = ShockSetup { v_minus, p_minus, speed: DetSpeed::Overdrive(overdrive) };
        store_profile(ProfileRep::build(&g, &s).map_err(lib)?, out);
        Ok(())
    })
}

/// Build a profile from the `gas` and `shock` sections of a JSON config.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn znd_profile_from_json(json: *const c_char, out: *mut *mut ZndProfile) -> ZndStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| (ZndStatus::Config, format!("config is not UTF-8: {e}")))?;
        let cfg = ScanConfig::from_json(text).map_err(lib)?;
        store_profile(ProfileRep::build(&cfg.gas, &cfg.shock).map_err(lib)?, out);
        Ok(())
    })
}

/// Release a profile; null is ignored.
///
/// # Safety
/// `p` must come from a `znd_profile_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn znd_profile_free(p: *mut ZndProfile) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// # Safety
/// `p` must be a live profile handle or null; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn znd_profile_info(p: *const ZndProfile, out: *mut ZndProfileInfo) -> ZndStatus {
    guard(|| {
        let p = unsafe { p.as_ref() }.ok_or_else(|| null("profile"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let r = &p.rep;
        *out = ZndProfileInfo {
            det_speed: r.det_speed,
            d_cj: r.d_cj,
            mu: r.mu,
            zeta0_abs: r.zeta0_abs(),
            zeta_inf_abs: r.zeta_inf_abs(),
            type_d: (r.type_classify().kind == ProfileType::TypeD) as i32,
        };
        Ok(())
    })
}

/// Decaying solution, V(ζ, h), L₁(ζ) and the type-θ₁ residual.
///
/// # Safety
/// `p` must be a live profile handle or null; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn znd_evans(p: *const ZndProfile, zeta_re: f64, zeta_im: f64, h: f64, out: *mut ZndEvansResult) -> ZndStatus {
    guard(|| {
        let p = unsafe { p.as_ref() }.ok_or_else(|| null("profile"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        if !(h > 0.0) {
            return Err((ZndStatus::Domain, format!("h = {h} must be positive")));
        }
        let r = evans(&p.rep, c64(zeta_re, zeta_im), h, &EvansOptions::default()).map_err(lib)?;
        let mut theta0 = [0.0; 10];
        for (k, z) in r.theta0.iter().enumerate() {
            theta0[2 * k] = z.re;
            theta0[2 * k + 1] = z.im;
        }
        *out = ZndEvansResult { v_re: r.v.re, v_im: r.v.im, l1_re: r.l1.re, l1_im: r.l1.im, theta1_residual: r.theta1_residual, theta0 };
        Ok(())
    })
}

/// Turning point x(ζ) of a frequency in III₊ (ζ = i·a with a between
/// |ζ∞| and |ζ₀|); other frequencies give `ZND_STATUS_DOMAIN`.
///
/// # Safety
/// `p` must be a live profile handle or null; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn znd_turning_point(p: *const ZndProfile, zeta_re: f64, zeta_im: f64, out: *mut ZndTurningPoint) -> ZndStatus {
    guard(|| {
        let p = unsafe { p.as_ref() }.ok_or_else(|| null("profile"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = match turning_point(&p.rep, c64(zeta_re, zeta_im)).map_err(lib)? {
            XCoord::Finite(x) => ZndTurningPoint { x, at_infinity: 0 },
            XCoord::Infinity => ZndTurningPoint { x: f64::INFINITY, at_infinity: 1 },
        };
        Ok(())
    })
}

/// Copy the last error message of this thread into `buf` (NUL-terminated).
/// Returns the message length in bytes excluding the NUL; when `len` is too
/// small nothing is written and the required length is still returned.
///
/// # Safety
/// `buf` must be writable for `len` bytes, or null with `len` = 0.
#[no_mangle]
pub unsafe extern "C" fn znd_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let n = e.len();
        if !buf.is_null() && len > n {
            unsafe {
                ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        n
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn znd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
