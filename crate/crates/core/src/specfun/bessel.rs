//! Modified Bessel functions I_ν and K_ν of complex order.
//!
//! I_ν: ascending series summed in double-double below `series_radius`, the
//! large-argument expansion (both exponentials) above it when that expansion
//! reaches the target accuracy. K_ν: reflection through I_{±ν} for |z| ≤ 2,
//! with a Cauchy average over a small circle in ν next to integer orders;
//! Steed's continued fraction plus forward recurrence for |z| > 2.

use super::dd::CDd;
use super::gamma::{ln_gamma, sin_pi};
use super::{Scaled, SeriesPolicy};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

pub const BESSEL_POLICY: SeriesPolicy = SeriesPolicy { series_radius: 20.0, asym_terms: 80, target_eps: 1e-12 };

/// Radius beyond which K uses the continued fraction.
const K_REFLECT_RADIUS: f64 = 2.0;
/// Distance to the integers below which the reflection formula is avoided.
const K_INTEGER_GAP: f64 = 1e-3;
const K_CIRCLE_RADIUS: f64 = 0.05;
const K_CIRCLE_POINTS: usize = 32;

/// A function value and its z-derivative sharing one exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselScaled {
    pub f: C64,
    pub fp: C64,
    pub log_scale: f64,
}

impl BesselScaled {
    pub fn value(&self) -> Scaled {
        Scaled { mant: self.f, log_scale: self.log_scale }
    }
    pub fn derivative(&self) -> Scaled {
        Scaled { mant: self.fp, log_scale: self.log_scale }
    }
    /// f'/f, free of overflow.
    pub fn log_derivative(&self) -> C64 {
        self.fp / self.f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselMethod {
    Series,
    Asymptotic,
}

fn check_domain(nu: C64, z: C64) -> Result<()> {
    if nu.re < -1e-14 || nu.norm() > 50.0 + 1e-12 {
        return Err(Error::domain(format!("Bessel order {nu} outside Re ν ≥ 0, |ν| ≤ 50")));
    }
    if z.norm() == 0.0 || z.arg().abs() > PI / 2.0 + 1e-12 || !z.is_finite() {
        return Err(Error::domain(format!("Bessel argument {z} outside |arg z| ≤ π/2")));
    }
    Ok(())
}

/// Ascending series for any order that is not a negative integer.
fn i_series(nu: C64, z: C64) -> BesselScaled {
    let n = nu.re.round();
    if nu.im == 0.0 && nu.re < 0.0 && nu.re == n {
        return i_series(-nu, z);
    }
    let q = CDd::from_c64(z * z * 0.25);
    let nud = CDd::from_c64(nu);
    let one = CDd::from_c64(C64::new(1.0, 0.0));
    let mut t = one;
    let mut s = one;
    // Derivative sum carries the factor (ν + 2k); the overall 1/z is applied last.
    let mut sd = nud;
    let mut prev = f64::INFINITY;
    let mut k = 1u64;
    loop {
        let kd = CDd::from_c64(C64::new(k as f64, 0.0));
        let denom = kd * (nud + kd);
        t = t * q * denom.recip();
        s = s + t;
        sd = sd + t * (nud + kd.mul_f64(2.0));
        let tn = t.norm_approx();
        if (tn <= 1e-20 * s.norm_approx() && tn <= prev && k as f64 > nu.norm()) || k > 5000 {
            break;
        }
        prev = tn;
        k += 1;
    }
    let ln_pref = nu * (z * 0.5).ln() - ln_gamma(nu + 1.0).unwrap_or(C64::new(f64::INFINITY, 0.0));
    let mant = C64::new(0.0, ln_pref.im).exp();
    BesselScaled { f: mant * s.to_c64(), fp: mant * sd.to_c64() / z, log_scale: ln_pref.re }
}

/// Large-|z| expansion of I_ν(z)·e^{−Re z}; `None` when the smallest term
/// exceeds the target.
fn i_asym_scaled(nu: C64, z: C64, pol: &SeriesPolicy) -> Option<C64> {
    let mu4 = nu * nu * 4.0;
    let inv = 1.0 / z;
    let mut a = C64::new(1.0, 0.0);
    let mut s1 = a;
    let mut s2 = a;
    let mut pw = C64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut converged = false;
    for k in 1..pol.asym_terms {
        let kf = k as f64;
        a = a * (mu4 - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        pw *= inv;
        let term = a * pw;
        let tn = term.norm();
        if tn > prev {
            break;
        }
        prev = tn;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s1 += term * sign;
        s2 += term;
        if tn < pol.target_eps * 1e-3 {
            converged = true;
            break;
        }
    }
    if !converged && prev > pol.target_eps * 1e-2 {
        return None;
    }
    let sigma = if z.im >= 0.0 { 1.0 } else { -1.0 };
    let root = (2.0 * PI * z).sqrt();
    let first = C64::new(0.0, z.im).exp() / root * s1;
    let rot = C64::new(0.0, sigma) * (C64::new(0.0, sigma * PI) * nu).exp();
    let second = rot * C64::new(-2.0 * z.re, -z.im).exp() / root * s2;
    Some(first + second)
}

fn i_asym(nu: C64, z: C64, pol: &SeriesPolicy) -> Option<BesselScaled> {
    let f = i_asym_scaled(nu, z, pol)?;
    let f1 = i_asym_scaled(nu + 1.0, z, pol)?;
    Some(BesselScaled { f, fp: f1 + nu / z * f, log_scale: z.re })
}

/// I_ν by a prescribed route (for seam tests). Returns `None` when the
/// asymptotic route cannot reach its target.
pub fn bessel_i_by(method: BesselMethod, nu: C64, z: C64) -> Option<BesselScaled> {
    match method {
        BesselMethod::Series => Some(i_series(nu, z)),
        BesselMethod::Asymptotic => i_asym(nu, z, &BESSEL_POLICY),
    }
}

/// I_ν(z) and I_ν′(z), scaled.
pub fn bessel_i(nu: C64, z: C64) -> Result<BesselScaled> {
    check_domain(nu, z)?;
    if z.norm() >= BESSEL_POLICY.series_radius {
        if let Some(v) = i_asym(nu, z, &BESSEL_POLICY) {
            return Ok(v);
        }
        if z.norm() > 600.0 {
            return Err(Error::domain(format!("I_ν for ν={nu}, z={z}: no convergent route")));
        }
    }
    Ok(i_series(nu, z))
}

/// I_ν′ by term-wise differentiation of the ascending series. Kept separate
/// from [`bessel_i`] so identities can be checked against an independent route.
pub fn bessel_i_series_derivative(nu: C64, z: C64) -> Scaled {
    let s = i_series(nu, z);
    Scaled { mant: s.fp, log_scale: s.log_scale }
}

fn k_reflect(nu: C64, z: C64) -> C64 {
    let a = i_series(-nu, z).value().value();
    let b = i_series(nu, z).value().value();
    PI / 2.0 * (a - b) / sin_pi(nu)
}

fn k_small(nu: C64, z: C64) -> C64 {
    let n = nu.re.round();
    let near = C64::new(n, 0.0);
    if (nu - near).norm() >= K_INTEGER_GAP {
        return k_reflect(nu, z);
    }
    // K is entire in ν: recover it from a circle around the integer.
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..K_CIRCLE_POINTS {
        let e = C64::from_polar(K_CIRCLE_RADIUS, 2.0 * PI * j as f64 / K_CIRCLE_POINTS as f64);
        let w = near + e;
        acc += k_reflect(w, z) * e / (w - nu);
    }
    acc / K_CIRCLE_POINTS as f64
}

/// Steed's continued fraction: K_μ(z)e^{z} and K_{μ+1}(z)e^{z}, |Re μ| ≤ 1/2.
fn k_cf2(mu: C64, z: C64) -> Result<(C64, C64)> {
    let one = C64::new(1.0, 0.0);
    let mut b = (one + z) * 2.0;
    let mut d = one / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = C64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut ok = false;
    for i in 1..20000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = one / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() && i > 2 {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(Error::numerical(format!("K continued fraction did not converge for μ={mu}, z={z}")));
    }
    h = a1 * h;
    let kmu = (PI / (2.0 * z)).sqrt() / s;
    let k1 = kmu * (mu + z + 0.5 - h) / z;
    Ok((kmu, k1))
}

/// K_ν(z) and K_ν′(z), scaled.
pub fn bessel_k(nu: C64, z: C64) -> Result<BesselScaled> {
    check_domain(nu, z)?;
    if z.norm() <= K_REFLECT_RADIUS {
        let k0 = k_small(nu, z);
        let k1 = k_small(nu + 1.0, z);
        return Ok(BesselScaled { f: k0, fp: -k1 + nu / z * k0, log_scale: 0.0 });
    }
    let n = nu.re.round().max(0.0) as usize;
    let mu = nu - n as f64;
    let (mut km, mut kp) = k_cf2(mu, z)?;
    for j in 1..=n {
        let next = km + (mu + j as f64) * 2.0 / z * kp;
        km = kp;
        kp = next;
    }
    // Undo the e^{z} normalization: keep e^{−Re z} in the exponent.
    let phase = C64::new(0.0, -z.im).exp();
    let f = km * phase;
    let fnext = kp * phase;
    Ok(BesselScaled { f, fp: -fnext + nu / z * f, log_scale: -z.re })
}

/// ln of the I-envelope `|z^α e^z| / (1 + |z|^{α+1/2})`, α = Re ν.
pub fn envelope_ln_v(nu: C64, z: C64) -> f64 {
    let al = nu.re;
    let r = z.norm();
    al * r.ln() + z.re - (1.0 + r.powf(al + 0.5)).ln()
}

/// ln of the K-envelope `ℓ_ν(z)(1+|z|^α)/(1+|z|^{1/2}) · |e^{−z}|/|z|^α`.
pub fn envelope_ln_x(nu: C64, z: C64, delta: f64) -> f64 {
    let al = nu.re;
    let r = z.norm();
    let ell = if nu.norm() < delta { ((1.0 + 2.0 * r) / r).ln() } else { 1.0 };
    ell.ln() + (1.0 + r.powf(al)).ln() - (1.0 + r.sqrt()).ln() - z.re - al * r.ln()
}

/// The weight `(V_ν/X_ν)^{1/2}` balancing the I and K envelopes.
pub fn envelope_weight(nu: C64, z: C64, delta: f64) -> f64 {
    (0.5 * (envelope_ln_v(nu, z) - envelope_ln_x(nu, z, delta))).exp()
}
