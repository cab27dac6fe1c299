//! Linearized high-frequency system `h θ' = (Φ₀(x,ζ) + h Φ₁(x)) θ`.
//!
//! State ordering is (v, u, ũ, S, λ) with ũ the reduced transverse component.
//! All x-derivatives of profile quantities go through λ: `f' = λH(λ) df/dλ`.

use crate::profile::{ProfilePoint, ProfileRep, XCoord};
use crate::thermo::{self, GasModel};
use crate::{quad, Error, Result, C64, I};
use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

pub type RMat5 = Matrix5<f64>;
pub type CMat5 = Matrix5<C64>;
pub type CVec5 = Vector5<C64>;

/// A frequency ζ with Re ζ ≥ 0 and scale parameter h ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub zeta: C64,
    pub h: f64,
}

impl FrequencyPoint {
    pub fn new(zeta: C64, h: f64) -> Result<Self> {
        if !(zeta.re >= 0.0) || !zeta.im.is_finite() || !zeta.re.is_finite() {
            return Err(Error::domain(format!("Re ζ must be ≥ 0, got ζ = {zeta}")));
        }
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::domain(format!("h = {h} outside (0, 1]")));
        }
        Ok(FrequencyPoint { zeta, h })
    }
    pub fn tau(&self) -> C64 {
        self.zeta / self.h
    }
    pub fn epsilon(&self) -> f64 {
        1.0 / self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemMatrices {
    pub a_x: RMat5,
    pub a_y: RMat5,
    pub b: RMat5,
    pub phi0: CMat5,
    pub phi1: RMat5,
}

/// Real building blocks of the generator: `Φ₀ = ζ·r_t + i·s_t`,
/// `G = Φ₀ + hΦ₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParts {
    pub r_t: RMat5,
    pub s_t: RMat5,
    pub phi1: RMat5,
}

impl GeneratorParts {
    pub fn phi0(&self, zeta: C64) -> CMat5 {
        self.r_t.map(|r| zeta * r) + self.s_t.map(|s| I * s)
    }
    pub fn generator(&self, zeta: C64, h: f64) -> CMat5 {
        self.phi0(zeta) + self.phi1.map(|p| C64::new(h * p, 0.0))
    }
}

/// A_x, A_y and B at a profile point.
pub fn coefficient_matrices(g: &GasModel, pt: &ProfilePoint) -> (RMat5, RMat5, RMat5) {
    let st = pt.thermo_state();
    // The profile point already lies in the thermodynamic domain.
    let pr = thermo::pressure(g, &st).expect("pressure at profile point");
    let r = thermo::rate(g, &st).expect("rate at profile point");
    let phi = thermo::entropy_source(g, &st).expect("entropy source at profile point");
    let (u, v) = (pt.u, pt.v);
    let (p_v, p_s, p_l) = (pr.d_v, pr.d_s, pr.d_lambda);
    #[rustfmt::skip]
    let a_x = RMat5::new(
        u, -v, 0.0, 0.0, 0.0,
        v * p_v, u, 0.0, v * p_s, v * p_l,
        0.0, 0.0, u, 0.0, 0.0,
        0.0, 0.0, 0.0, u, 0.0,
        0.0, 0.0, 0.0, 0.0, u,
    );
    #[rustfmt::skip]
    let a_y = RMat5::new(
        0.0, 0.0, -v, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0,
        v * p_v, 0.0, 0.0, v * p_s, v * p_l,
        0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0,
    );
    let lx = pt.lam_x;
    let (u_x, v_x, p_x, s_x) = (lx * pt.u_l, lx * pt.v_l, lx * pt.p_l, lx * pt.s_l);
    let (pv_x, ps_x) = (lx * pt.p_v_l, lx * pt.p_s_l);
    // p_λ vanishes identically for this gas, so its derivative does too.
    let pl_x = 0.0;
    #[rustfmt::skip]
    let b = RMat5::new(
        -u_x, v_x, 0.0, 0.0, 0.0,
        p_x + v * pv_x, u_x, 0.0, v * ps_x, v * pl_x,
        0.0, 0.0, 0.0, 0.0, 0.0,
        -phi.d_v, s_x, 0.0, -phi.d_s, -phi.d_lambda,
        -r.d_v, lx, 0.0, -r.d_s, -r.d_lambda,
    );
    (a_x, a_y, b)
}

pub fn generator_parts(g: &GasModel, pt: &ProfilePoint) -> GeneratorParts {
    let (a_x, a_y, b) = coefficient_matrices(g, pt);
    // u > 0 and u ≠ c₀ keep A_x invertible on the profile.
    let inv = a_x.try_inverse().expect("A_x invertible on a subsonic profile");
    GeneratorParts { r_t: inv.transpose(), s_t: (inv * a_y).transpose(), phi1: (inv * b).transpose() }
}

pub fn matrices_at_point(g: &GasModel, pt: &ProfilePoint, zeta: C64) -> SystemMatrices {
    let (a_x, a_y, b) = coefficient_matrices(g, pt);
    let inv = a_x.try_inverse().expect("A_x invertible on a subsonic profile");
    let lhs = inv.map(|v| C64::new(v, 0.0)) * (CMat5::identity() * zeta + a_y.map(|v| I * v));
    SystemMatrices { a_x, a_y, b, phi0: lhs.transpose(), phi1: (inv * b).transpose() }
}

fn point_at(rep: &ProfileRep, x: XCoord) -> Result<ProfilePoint> {
    match x {
        XCoord::Infinity => Ok(rep.endstate),
        XCoord::Finite(x) if x >= 0.0 => rep.state_at_x(x),
        XCoord::Finite(x) => Err(Error::domain(format!("x = {x} < 0"))),
    }
}

pub fn matrices_at(rep: &ProfileRep, x: XCoord, zeta: C64) -> Result<SystemMatrices> {
    Ok(matrices_at_point(&rep.gas, &point_at(rep, x)?, zeta))
}

/// Φ₀ from its explicit entries.
pub fn phi0_closed_form_point(g: &GasModel, pt: &ProfilePoint, zeta: C64) -> CMat5 {
    let pr = thermo::pressure(g, &pt.thermo_state()).expect("pressure at profile point");
    let (p_s, p_l) = (pr.d_s, pr.d_lambda);
    let u = pt.u;
    let m = pt.u / pt.v;
    let eta = pt.eta();
    let k2 = 1.0 - eta;
    let z = zeta;
    let zu = z / u;
    let o = C64::new(0.0, 0.0);
    #[rustfmt::skip]
    let out = CMat5::new(
        -k2 * z / (eta * u), -m * z / (eta * u), -I * m / k2, o, o,
        -k2 * z / (eta * m * u), -k2 * z / (eta * u), o, o, o,
        I * k2 / (eta * m), I / eta, zu, o, o,
        k2 * p_s * z / (eta * m * m * u), k2 * p_s * z / (eta * m * u), I * p_s / m, zu, o,
        k2 * p_l * z / (eta * m * m * u), k2 * p_l * z / (eta * m * u), I * p_l / m, o, zu,
    );
    out
}

pub fn phi0_closed_form(rep: &ProfileRep, x: XCoord, zeta: C64) -> Result<CMat5> {
    Ok(phi0_closed_form_point(&rep.gas, &point_at(rep, x)?, zeta))
}

/// Branch of `s = (ζ² + c₀²η)^{1/2}` on Re ζ ≥ 0.
pub fn s_branch(zeta: C64, c0sq_eta: f64) -> C64 {
    let w = zeta * zeta + c0sq_eta;
    if zeta.re > 0.0 {
        return w.sqrt();
    }
    let w_re = zeta.re * zeta.re - zeta.im * zeta.im + c0sq_eta;
    let r = w.norm().sqrt();
    if w_re > 0.0 {
        C64::new(r, 0.0)
    } else if zeta.im >= 0.0 {
        C64::new(0.0, r)
    } else {
        C64::new(0.0, -r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    pub eta: f64,
    pub kappa: f64,
    pub s: C64,
    pub mu: [C64; 5],
    /// Columns are the eigenvectors T₁…T₅.
    pub t: CMat5,
    pub p0: CVec5,
    pub q0: CVec5,
    pub m: f64,
    /// Set when s = 0 or ζ = u, where T degenerates.
    pub singular: bool,
}

impl SpectralData {
    pub fn t_col(&self, i: usize) -> CVec5 {
        self.t.column(i).into()
    }
}

pub fn spectral_point(g: &GasModel, pt: &ProfilePoint, zeta: C64) -> SpectralData {
    let pr = thermo::pressure(g, &pt.thermo_state()).expect("pressure at profile point");
    let (p_s, p_l) = (pr.d_s, pr.d_lambda);
    let u = pt.u;
    let m = pt.u / pt.v;
    let kappa = pt.kappa();
    let eta = pt.eta();
    let s = s_branch(zeta, pt.c0sq_eta());
    let mu1 = -kappa * (kappa * zeta + s) / (eta * u);
    let mu2 = -kappa * (kappa * zeta - s) / (eta * u);
    let mu3 = zeta / u;
    let zero = C64::new(0.0, 0.0);
    let p0 = CVec5::new(zero, zeta / u, -I, zero, zero);
    let q0 = CVec5::new(
        C64::new(m / (kappa * u), 0.0),
        zero,
        zero,
        C64::new(-kappa * p_s / (m * u), 0.0),
        C64::new(-kappa * p_l / (m * u), 0.0),
    );
    let t1 = p0 + q0 * s;
    let t2 = p0 - q0 * s;
    let t3 = CVec5::new(-I * m / (1.0 - eta), I, zeta / u, zero, zero);
    let one = C64::new(1.0, 0.0);
    let t4 = CVec5::new(zero, zero, zero, one, zero);
    let t5 = CVec5::new(zero, zero, zero, zero, one);
    let t = CMat5::from_columns(&[t1, t2, t3, t4, t5]);
    let scale = 1e-8 * (1.0 + zeta.norm()).max(u);
    let singular = s.norm() < scale || (zeta - u).norm() < scale;
    SpectralData { eta, kappa, s, mu: [mu1, mu2, mu3, mu3, mu3], t, p0, q0, m, singular }
}

pub fn spectral_data(rep: &ProfileRep, x: XCoord, zeta: C64) -> Result<SpectralData> {
    Ok(spectral_point(&rep.gas, &point_at(rep, x)?, zeta))
}

/// (dP₀/dλ, dQ₀/dλ, dT₃/dλ) at a profile point.
pub fn basis_dlambda(g: &GasModel, pt: &ProfilePoint, zeta: C64) -> (CVec5, CVec5, CVec5) {
    let pr = thermo::pressure(g, &pt.thermo_state()).expect("pressure at profile point");
    let u = pt.u;
    let kappa = pt.kappa();
    let m = pt.u / pt.v;
    let (p_s, p_l) = (pr.d_s, pr.d_lambda);
    let (u_l, p_s_l) = (pt.u_l, pt.p_s_l);
    let kappa_l = kappa * (u_l / u - pt.c0sq_l / (2.0 * pt.c0sq));
    let zero = C64::new(0.0, 0.0);
    let q1 = m / (kappa * u);
    let q1_l = -q1 * (kappa_l / kappa + u_l / u);
    let q4_l = -(kappa_l * p_s + kappa * p_s_l) / (m * u) + kappa * p_s * u_l / (m * u * u);
    // p_λ ≡ 0 has zero derivative.
    let q5_l = -kappa_l * p_l / (m * u) + kappa * p_l * u_l / (m * u * u);
    let dz = -zeta * u_l / (u * u);
    let dp0 = CVec5::new(zero, dz, zero, zero, zero);
    let dq0 = CVec5::new(C64::new(q1_l, 0.0), zero, zero, C64::new(q4_l, 0.0), C64::new(q5_l, 0.0));
    let dt3 = CVec5::new(I * (2.0 * m * kappa_l / kappa.powi(3)), zero, dz, zero, zero);
    (dp0, dq0, dt3)
}

/// dT/dλ at a profile point, column by column.
pub fn spectral_dlambda(g: &GasModel, pt: &ProfilePoint, zeta: C64) -> CMat5 {
    let sd = spectral_point(g, pt, zeta);
    let s_l = pt.c0sq_eta_l() / (2.0 * sd.s);
    let (dp0, dq0, dt3) = basis_dlambda(g, pt, zeta);
    let dsq = dq0 * sd.s + sd.q0 * s_l;
    CMat5::from_columns(&[dp0 + dsq, dp0 - dsq, dt3, CVec5::zeros(), CVec5::zeros()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreqClass {
    I,
    II,
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Zeta0,
    ZetaInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub class: FreqClass,
    /// Class III with Im ζ > 0.
    pub plus: bool,
    pub endpoint: Option<Endpoint>,
}

/// Profile ranges of c₀√η and u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRanges {
    pub ceta_min: f64,
    pub ceta_max: f64,
    pub u_min: f64,
    pub u_max: f64,
}

pub fn class_ranges(rep: &ProfileRep) -> ClassRanges {
    let mut r = ClassRanges { ceta_min: f64::INFINITY, ceta_max: 0.0, u_min: f64::INFINITY, u_max: 0.0 };
    for j in 0..=1024 {
        let pt = rep.state_of_lambda(j as f64 / 1024.0).expect("profile state");
        let c = pt.c0sq_eta().sqrt();
        r.ceta_min = r.ceta_min.min(c);
        r.ceta_max = r.ceta_max.max(c);
        r.u_min = r.u_min.min(pt.u);
        r.u_max = r.u_max.max(pt.u);
    }
    r
}

const ENDPOINT_TOL: f64 = 1e-12;

pub fn classify_with(ranges: &ClassRanges, rep: &ProfileRep, zeta: C64) -> ClassInfo {
    let a = zeta.norm();
    let slack = ENDPOINT_TOL * a.max(1.0);
    if zeta.re.abs() <= 1e-14 * a.max(1.0) && a >= ranges.ceta_min - slack && a <= ranges.ceta_max + slack {
        let endpoint = if (a - rep.zeta0_abs()).abs() <= slack {
            Some(Endpoint::Zeta0)
        } else if (a - rep.zeta_inf_abs()).abs() <= slack {
            Some(Endpoint::ZetaInf)
        } else {
            None
        };
        return ClassInfo { class: FreqClass::III, plus: zeta.im > 0.0, endpoint };
    }
    if zeta.im.abs() <= 1e-14 * a.max(1.0) && zeta.re >= ranges.u_min - slack && zeta.re <= ranges.u_max + slack {
        return ClassInfo { class: FreqClass::II, plus: false, endpoint: None };
    }
    ClassInfo { class: FreqClass::I, plus: false, endpoint: None }
}

pub fn classify_class(rep: &ProfileRep, zeta: C64) -> ClassInfo {
    classify_with(&class_ranges(rep), rep, zeta)
}

/// λ at which c₀²η equals `target`, searched on [0, λ_hi]. c₀²η is
/// increasing in λ for type-D profiles.
pub fn lambda_where_c0sq_eta(rep: &ProfileRep, target: f64, lambda_hi: f64) -> Result<f64> {
    let f = |l: f64| rep.state_of_lambda(l).map(|p| p.c0sq_eta() - target);
    let (mut lo, mut hi) = (0.0, lambda_hi);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo * fhi > 0.0 {
        return Err(Error::domain(format!("c0²η = {target} not attained on [0, {lambda_hi}]")));
    }
    let increasing = fhi > flo;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (f(mid)? > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let mut l = 0.5 * (lo + hi);
    for _ in 0..30 {
        let pt = rep.state_of_lambda(l)?;
        let step = (pt.c0sq_eta() - target) / pt.c0sq_eta_l();
        l = (l - step).clamp(lo, hi);
        if step.abs() < 1e-16 {
            break;
        }
    }
    Ok(l)
}

/// Turning point x(ζ) for ζ ∈ III₊; ζ₀ maps to 0 and ζ∞ to infinity.
pub fn turning_point(rep: &ProfileRep, zeta: C64) -> Result<XCoord> {
    let info = classify_class(rep, zeta);
    if info.class != FreqClass::III || !info.plus {
        return Err(Error::domain(format!("ζ = {zeta} is not in III₊")));
    }
    match info.endpoint {
        Some(Endpoint::Zeta0) => return Ok(XCoord::Finite(0.0)),
        Some(Endpoint::ZetaInf) => return Ok(XCoord::Infinity),
        None => {}
    }
    let l = lambda_where_c0sq_eta(rep, zeta.norm_sqr(), 1.0)?;
    if l <= 0.0 {
        return Ok(XCoord::Infinity);
    }
    rep.x_of_lambda(l)
}

/// x_ζ = −2ζ/f_x with f = ζ² + c₀²η, evaluated at the turning point of |ζ|.
pub fn x_zeta_derivative(rep: &ProfileRep, zeta: C64) -> Result<C64> {
    let r = class_ranges(rep);
    let a = zeta.norm();
    if !(a > r.ceta_min && a <= r.ceta_max) {
        return Err(Error::domain(format!("|ζ| = {a} has no finite turning point")));
    }
    let l = lambda_where_c0sq_eta(rep, a * a, 1.0)?;
    let pt = rep.state_of_lambda(l)?;
    let f_x = pt.lam_x * pt.c0sq_eta_l();
    if f_x == 0.0 {
        return Err(Error::domain("f_x vanishes at the turning point"));
    }
    Ok(-2.0 * zeta / f_x)
}

/// Integrand of h_i and k_i in τ = −ln λ (dx = dτ/|H|).
fn wkb_integrands(g: &GasModel, rep: &ProfileRep, i: usize, zeta: C64, tau: f64) -> (C64, C64) {
    let pt = rep.state_of_lambda((-tau).exp()).expect("profile state");
    let sd = spectral_point(g, &pt, zeta);
    let gp = generator_parts(g, &pt);
    let t_i = sd.t_col(i);
    let dt = spectral_dlambda(g, &pt, zeta).column(i) * C64::new(pt.lam_x, 0.0);
    let inv = sd.t.try_inverse().expect("T nonsingular away from turning points");
    let ell = inv.row(i);
    let phi1 = gp.phi1.map(|v| C64::new(v, 0.0));
    let k_prime = (ell * (phi1 * t_i - dt))[(0, 0)];
    let jac = -1.0 / pt.hh;
    (sd.mu[i] * jac, k_prime * jac)
}

/// Leading WKB approximant `exp(h_i/h + k_i) T_i(x, ζ)` for index `i` in 1..=5.
pub fn wkb_leading(rep: &ProfileRep, i: usize, x: f64, zeta: C64, h: f64) -> Result<CVec5> {
    if !(1..=5).contains(&i) {
        return Err(Error::domain(format!("eigen index {i} outside 1..=5")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("x = {x} < 0")));
    }
    let info = classify_class(rep, zeta);
    if info.class == FreqClass::III {
        let xt = if zeta.im > 0.0 { turning_point(rep, zeta)? } else { turning_point(rep, zeta.conj())? };
        if let XCoord::Finite(xt) = xt {
            if xt <= x {
                return Err(Error::domain(format!("turning point x = {xt} lies in [0, {x}]")));
            }
        }
    }
    let g = &rep.gas;
    let idx = i - 1;
    let tau = rep.tau_of_x(x)?;
    let (hi, _) = quad::integrate(|t| wkb_integrands(g, rep, idx, zeta, t).0, 0.0, tau, 1e-12, 1e-10);
    let (ki, _) = quad::integrate(|t| wkb_integrands(g, rep, idx, zeta, t).1, 0.0, tau, 1e-12, 1e-10);
    let sd = spectral_data(rep, XCoord::Finite(x), zeta)?;
    Ok(sd.t_col(idx) * (hi / h + ki).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::profile::reference_profile;
    use proptest::prelude::*;

    fn rel(a: &CMat5, b: &CMat5) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn s_branch_values() {
        assert!((s_branch(c64(2.0, 0.0), 1.0) - 5f64.sqrt()).norm() < 1e-15);
        assert!((s_branch(c64(0.0, 2.0), 1.0) - c64(0.0, 3f64.sqrt())).norm() < 1e-15);
        assert!((s_branch(c64(0.0, -2.0), 1.0) - c64(0.0, -(3f64.sqrt()))).norm() < 1e-15);
        // Limit from Re ζ > 0 matches the boundary value.
        let z = c64(1e-9, 2.0);
        assert!((s_branch(z, 1.0) - s_branch(c64(0.0, 2.0), 1.0)).norm() < 1e-8);
    }

    #[test]
    fn b_row_three_vanishes_and_infinity_structure() {
        let rep = reference_profile();
        let m = matrices_at(rep, XCoord::Finite(1.3), c64(0.2, 0.7)).unwrap();
        assert!(m.b.row(2).iter().all(|v| *v == 0.0));
        let inf = matrices_at(rep, XCoord::Infinity, c64(0.2, 0.7)).unwrap();
        for r in 0..4 {
            assert!(inf.phi1.row(r).iter().all(|v| *v == 0.0));
        }
        assert!(inf.phi1[(4, 4)] != 0.0);
        // Finite X_max approaches the endstate.
        let far = matrices_at(rep, XCoord::Finite(rep.x_max_default()), c64(0.2, 0.7)).unwrap();
        assert!((far.phi1 - inf.phi1).norm() < 1e-9);
    }

    #[test]
    fn phi0_explicit_entries() {
        let rep = reference_profile();
        let z = c64(0.3, 0.4);
        let pt = rep.state_at_x(0.8).unwrap();
        let p = phi0_closed_form_point(&rep.gas, &pt, z);
        let m = pt.u / pt.v;
        assert!((p[(0, 2)] - (-I * m / (1.0 - pt.eta()))).norm() < 1e-14);
        for k in 2..5 {
            assert_eq!(p[(k, k)], z / pt.u);
        }
    }

    #[test]
    fn eigenvalue_example() {
        // κ = 0.5, η = 0.75, u = 1, ζ = 1, c₀ = 2, s = 2.
        let (k, eta, u, z) = (0.5, 0.75, 1.0, 1.0);
        let s = s_branch(c64(z, 0.0), 4.0 * eta);
        let mu1 = -k * (k * z + s) / (eta * u);
        let mu2 = -k * (k * z - s) / (eta * u);
        assert!((mu1 - c64(-5.0 / 3.0, 0.0)).norm() < 1e-14);
        assert!((mu2 - c64(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn parallel_columns_at_s_zero() {
        let rep = reference_profile();
        let z = c64(0.0, 0.88);
        let xt = turning_point(rep, z).unwrap().finite().unwrap();
        let sd = spectral_data(rep, XCoord::Finite(xt), z).unwrap();
        assert!(sd.s.norm() < 1e-7);
        assert!(sd.singular);
        assert!((sd.t_col(0) - sd.t_col(1)).norm() < 1e-6);
    }

    #[test]
    fn classes_and_endpoints() {
        let rep = reference_profile();
        let z0 = c64(0.0, rep.zeta0_abs());
        let zi = c64(0.0, rep.zeta_inf_abs());
        let a = classify_class(rep, zi);
        assert_eq!((a.class, a.endpoint), (FreqClass::III, Some(Endpoint::ZetaInf)));
        assert_eq!(classify_class(rep, c64(1.0, 1.0)).class, FreqClass::I);
        assert_eq!(classify_class(rep, c64(rep.plus.u, 0.0)).class, FreqClass::II);
        assert_eq!(turning_point(rep, z0).unwrap(), XCoord::Finite(0.0));
        assert_eq!(turning_point(rep, zi).unwrap(), XCoord::Infinity);
        assert!(turning_point(rep, c64(0.1, 0.88)).is_err());
        let xz = x_zeta_derivative(rep, c64(0.0, 0.88)).unwrap();
        assert!(xz.im > 0.0);
    }

    #[test]
    fn turning_point_zeroes_s() {
        let rep = reference_profile();
        for y in [0.83, 0.86, 0.9, 0.93] {
            let z = c64(0.0, y);
            let xt = turning_point(rep, z).unwrap().finite().unwrap();
            let pt = rep.state_at_x(xt).unwrap();
            assert!(s_branch(z, pt.c0sq_eta()).norm_sqr() < 1e-10, "y={y}");
        }
    }

    #[test]
    fn wkb_matches_at_origin_and_decays() {
        let rep = reference_profile();
        let z = c64(0.5, 1.2);
        let w0 = wkb_leading(rep, 1, 0.0, z, 0.1).unwrap();
        let t1 = spectral_data(rep, XCoord::Finite(0.0), z).unwrap().t_col(0);
        assert!((w0 - t1).norm() < 1e-12);
        let w1 = wkb_leading(rep, 1, 1.0, z, 0.1).unwrap();
        assert!(w1.norm() < w0.norm());
        assert!(wkb_leading(rep, 1, 2.0, c64(0.0, 0.93), 0.1).is_err());
    }

    fn wkb_defect(rep: &ProfileRep, z: C64, x: f64, h: f64) -> f64 {
        let e = 1e-5;
        let th = wkb_leading(rep, 1, x, z, h).unwrap();
        let d = (wkb_leading(rep, 1, x + e, z, h).unwrap() - wkb_leading(rep, 1, x - e, z, h).unwrap()) / C64::new(2.0 * e, 0.0);
        let gp = generator_parts(&rep.gas, &rep.state_at_x(x).unwrap());
        let res = d * C64::new(h, 0.0) - gp.generator(z, h) * th;
        res.norm() / th.norm()
    }

    #[test]
    fn wkb_defect_is_order_h() {
        let rep = reference_profile();
        let z = c64(0.5, 1.2);
        let hs = [1e-1, 1e-2];
        let d: Vec<f64> = hs.iter().map(|&h| wkb_defect(rep, z, 0.7, h)).collect();
        let order = (d[0] / d[1]).ln() / (hs[0] / hs[1]).ln();
        assert!(order >= 0.8, "order {order}: {d:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn product_and_closed_forms_agree(x in 0.0f64..40.0, zr in 0.0f64..5.0, zi in -5.0f64..5.0) {
            let rep = reference_profile();
            let z = c64(zr, zi);
            let pt = rep.state_at_x(x).unwrap();
            let sm = matrices_at_point(&rep.gas, &pt, z);
            prop_assert!(sm.a_x.determinant().abs() > 1e-8);
            let cf = phi0_closed_form_point(&rep.gas, &pt, z);
            prop_assert!(rel(&sm.phi0, &cf) < 1e-12);
            let gp = generator_parts(&rep.gas, &pt);
            prop_assert!(rel(&gp.phi0(z), &sm.phi0) < 1e-12);
        }

        #[test]
        fn eigen_identity(x in 0.0f64..40.0, zr in 0.0f64..5.0, zi in -5.0f64..5.0) {
            let rep = reference_profile();
            let z = c64(zr, zi);
            let pt = rep.state_at_x(x).unwrap();
            let sd = spectral_point(&rep.gas, &pt, z);
            prop_assume!(!sd.singular);
            let phi0 = phi0_closed_form_point(&rep.gas, &pt, z);
            for i in 0..5 {
                let t = sd.t_col(i);
                let r = phi0 * t - t * sd.mu[i];
                prop_assert!(r.norm() <= 1e-10 * (phi0.norm() * t.norm()));
            }
            prop_assert!(sd.mu[2] == sd.mu[3] && sd.mu[3] == sd.mu[4]);
            prop_assert!((sd.t_col(0) - (sd.p0 + sd.q0 * sd.s)).norm() <= 1e-12 * sd.t_col(0).norm());
            if zr > 1e-3 {
                prop_assert!(sd.mu[0].re < 0.0);
                for j in 1..5 { prop_assert!(sd.mu[j].re >= 0.0); }
            }
        }

        #[test]
        fn t_derivative_matches_differences(l in 0.05f64..0.95, zr in 0.0f64..3.0, zi in -3.0f64..3.0) {
            let rep = reference_profile();
            let z = c64(zr.max(0.01), zi);
            let e = 1e-6;
            let a = spectral_point(&rep.gas, &rep.state_of_lambda(l + e).unwrap(), z).t;
            let b = spectral_point(&rep.gas, &rep.state_of_lambda(l - e).unwrap(), z).t;
            let fd = (a - b) / C64::new(2.0 * e, 0.0);
            let an = spectral_dlambda(&rep.gas, &rep.state_of_lambda(l).unwrap(), z);
            prop_assert!((fd - an).norm() <= 1e-6 * an.norm().max(1.0));
        }

        #[test]
        fn b_derivatives_match_differences(x in 0.1f64..10.0) {
            let rep = reference_profile();
            let pt = rep.state_at_x(x).unwrap();
            let (_, _, b) = coefficient_matrices(&rep.gas, &pt);
            let e = 1e-5;
            let pa = rep.state_at_x(x + e).unwrap();
            let pb = rep.state_at_x(x - e).unwrap();
            let d = |f: fn(&ProfilePoint) -> f64| (f(&pa) - f(&pb)) / (2.0 * e);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * a.abs().max(1e-3);
            prop_assert!(close(b[(0, 0)], -d(|p| p.u)));
            prop_assert!(close(b[(0, 1)], d(|p| p.v)));
            prop_assert!(close(b[(1, 0)], d(|p| p.p) + pt.v * d(|p| p.p_v)));
            prop_assert!(close(b[(3, 1)], d(|p| p.s)));
            prop_assert!(close(b[(4, 1)], d(|p| p.lambda)));
        }

        #[test]
        fn s_is_continuous_in_right_half_plane(zr in 0.01f64..3.0, zi in -3.0f64..3.0, dir in 0.0f64..6.28) {
            let mut prev = s_branch(c64(zr, zi), 0.8);
            let step = c64(dir.cos(), dir.sin()) * 1e-3;
            let mut z = c64(zr, zi);
            for _ in 0..100 {
                let next = z + step;
                if next.re <= 0.0 { break; }
                let s = s_branch(next, 0.8);
                prop_assert!((s - prev).norm() < 0.1);
                prev = s;
                z = next;
            }
        }
    }
}
