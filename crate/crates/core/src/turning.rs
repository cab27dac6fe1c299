//! Turning points: the Langer map ρ near a finite turning point with its
//! Airy approximants, and the Bessel-type regimes near ζ∞.
//!
//! Profile data enter through Chebyshev fits of c₀²η and b̲ = −κ/(ηu) on a
//! real window; evaluating the fits at complex x continues them
//! analytically, which is what a complex turning point x(ζ) needs.

use crate::blockform::{BlockDecomp, ScalarReduction};
use crate::cheb::Cheb;
use crate::linsys::{basis_dlambda, classify_class, generator_parts, spectral_point, turning_point, ClassInfo, CVec5};
use crate::profile::{ProfileRep, XCoord};
use crate::quad::{gauss_legendre, integrate};
use crate::specfun::{airy_rotated_scaled, airy_scaled, bessel_i};
use crate::{c64, Error, Result, C64, I};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Complex-valued function of real x as a pair of Chebyshev fits.
#[derive(Debug, Clone)]
struct CCheb {
    re: Cheb,
    im: Cheb,
}

impl CCheb {
    fn fit<F: FnMut(f64) -> C64>(a: f64, b: f64, n: usize, mut f: F) -> Self {
        let mut vals = Vec::with_capacity(n);
        let re = Cheb::fit(a, b, n, |x| {
            let v = f(x);
            vals.push(v.im);
            v.re
        });
        // Same nodes in the same order, so the imaginary parts replay.
        let mut it = vals.into_iter();
        let im = Cheb::fit(a, b, n, |_| it.next().unwrap());
        CCheb { re, im }
    }
    fn eval(&self, x: f64) -> C64 {
        c64(self.re.eval(x), self.im.eval(x))
    }
    fn derivative(&self) -> CCheb {
        CCheb { re: self.re.derivative(), im: self.im.derivative() }
    }
}

const N_CHEB: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangerOptions {
    /// Half-width parameter; the working interval is [x_tp − 2δ, x_tp + 2δ].
    /// `None` picks δ so that |d| varies by less than 50% over it.
    pub delta: Option<f64>,
}

impl Default for LangerOptions {
    fn default() -> Self {
        LangerOptions { delta: None }
    }
}

/// Langer data near one finite turning point.
#[derive(Debug, Clone)]
pub struct LangerData {
    pub zeta_base: C64,
    pub zeta: C64,
    /// Turning point of `zeta_base` (real).
    pub x_base: f64,
    /// Turning point of `zeta` (complex when Re ζ > 0).
    pub x_tp: C64,
    pub delta: f64,
    pub interval: (f64, f64),
    g: Cheb,
    g1: Cheb,
    g2: Cheb,
    b: Cheb,
    b1: Cheb,
    b2: Cheb,
    rho: CCheb,
    rho1: CCheb,
    rho2: CCheb,
}

fn fit_window(rep: &ProfileRep, lo: f64, hi: f64) -> Result<(Cheb, Cheb)> {
    let mut err = None;
    let mut pts = Vec::with_capacity(N_CHEB);
    for k in 0..N_CHEB {
        let t = (PI * (k as f64 + 0.5) / N_CHEB as f64).cos();
        let x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
        match rep.state_at_x(x) {
            Ok(p) => pts.push(p),
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    let mut it = pts.iter();
    let g = Cheb::fit(lo, hi, N_CHEB, |_| it.next().unwrap().c0sq_eta());
    let mut it = pts.iter();
    let b = Cheb::fit(lo, hi, N_CHEB, |_| {
        let p = it.next().unwrap();
        -p.kappa() / (p.eta() * p.u)
    });
    Ok((g, b))
}

impl LangerData {
    fn g_c(&self, x: C64) -> C64 {
        self.g.eval_complex(x)
    }

    /// C(x, ζ) = (ζ² + c₀²η) b̲².
    pub fn c_fun(&self, x: C64) -> C64 {
        let b = self.b.eval_complex(x);
        (self.zeta * self.zeta + self.g_c(x)) * b * b
    }

    pub fn c_x(&self, x: C64) -> C64 {
        let (b, b1) = (self.b.eval_complex(x), self.b1.eval_complex(x));
        self.g1.eval_complex(x) * b * b + (self.zeta * self.zeta + self.g_c(x)) * 2.0 * b * b1
    }

    fn c_xx(&self, x: C64) -> C64 {
        let (b, b1, b2) = (self.b.eval_complex(x), self.b1.eval_complex(x), self.b2.eval_complex(x));
        let f = self.zeta * self.zeta + self.g_c(x);
        self.g2.eval_complex(x) * b * b + self.g1.eval_complex(x) * 4.0 * b * b1 + f * 2.0 * (b1 * b1 + b * b2)
    }

    /// d(x, ζ) = ∫₀¹ C_x(x_tp + t(x − x_tp)) dt, so C = (x − x_tp) d.
    pub fn d_fun(&self, x: C64) -> C64 {
        let (t, w) = gl();
        t.iter().zip(w).map(|(&t, &w)| self.c_x(self.x_tp + (x - self.x_tp) * t) * w).sum()
    }

    fn d_x(&self, x: C64) -> C64 {
        let (t, w) = gl();
        t.iter().zip(w).map(|(&t, &w)| self.c_xx(self.x_tp + (x - self.x_tp) * t) * (t * w)).sum()
    }

    /// ρ from the u²-weighted quadrature of √(−d); the inner root is the
    /// one positive for real x when Re ζ = 0.
    pub fn rho_direct(&self, x: C64) -> C64 {
        let (u, w) = gl();
        let f: C64 = u
            .iter()
            .zip(w)
            .map(|(&u, &w)| (-self.d_fun(self.x_tp + (x - self.x_tp) * (u * u))).sqrt() * (3.0 * u * u * w))
            .sum();
        (self.x_tp - x) * f.powf(2.0 / 3.0)
    }

    /// ρ_x by differentiating the quadrature formula.
    pub fn rho_x_direct(&self, x: C64) -> C64 {
        let (u, w) = gl();
        let (mut f, mut fx) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (&u, &w) in u.iter().zip(w) {
            let y = self.x_tp + (x - self.x_tp) * (u * u);
            let r = (-self.d_fun(y)).sqrt();
            f += r * (3.0 * u * u * w);
            fx += -self.d_x(y) * (u * u) / (2.0 * r) * (3.0 * u * u * w);
        }
        -f.powf(2.0 / 3.0) + (self.x_tp - x) * (2.0 / 3.0) * f.powf(-1.0 / 3.0) * fx
    }

    pub fn rho(&self, x: f64) -> C64 {
        self.rho.eval(x)
    }
    pub fn rho_x(&self, x: f64) -> C64 {
        self.rho1.eval(x)
    }
    pub fn rho_xx(&self, x: f64) -> C64 {
        self.rho2.eval(x)
    }

    /// b̲ and b̲_x at real x from the fit.
    pub fn b_under(&self, x: f64) -> (f64, f64) {
        (self.b.eval(x), self.b1.eval(x))
    }

    /// max |ρ_x²ρ − C| over `n` points of the interval, relative to max |C|.
    pub fn identity_residual(&self, n: usize) -> f64 {
        let (lo, hi) = self.interval;
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for k in 0..n {
            let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let c = self.c_fun(x.into());
            let r1 = self.rho_x(x);
            num = num.max((r1 * r1 * self.rho(x) - c).norm());
            den = den.max(c.norm());
        }
        num / den
    }
}

fn gl() -> (&'static [f64], &'static [f64]) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (t, w) = RULE.get_or_init(|| {
        let (t, w) = gauss_legendre(24);
        // Map from [−1, 1] to [0, 1].
        (t.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
    });
    (t, w)
}

fn newton_turning_point(ld: &LangerData, x0: C64) -> Result<C64> {
    let z2 = ld.zeta * ld.zeta;
    let mut x = x0;
    for _ in 0..60 {
        let f = z2 + ld.g_c(x);
        let step = f / ld.g1.eval_complex(x);
        x -= step;
        if step.norm() < 1e-15 * (1.0 + x.norm()) {
            return Ok(x);
        }
    }
    Err(Error::numerical(format!("turning point Newton failed for ζ = {}", ld.zeta)))
}

fn build_common(rep: &ProfileRep, zeta: C64, base: C64, x_base: f64, delta: f64, allow_negative: bool) -> Result<LangerData> {
    let lo = x_base - 2.0 * delta;
    let hi = x_base + 2.0 * delta;
    if (!allow_negative && lo <= 0.0) || hi >= rep.x_max_default() {
        return Err(Error::domain(format!("Langer interval [{lo}, {hi}] leaves (0, X_max)")));
    }
    // The fit window is a little wider than the interval so complex x_tp
    // stays well inside the Bernstein ellipse.
    let (g, b) = fit_window(rep, x_base - 2.5 * delta, x_base + 2.5 * delta)?;
    let (g1, b1) = (g.derivative(), b.derivative());
    let (g2, b2) = (g1.derivative(), b1.derivative());
    let mut ld = LangerData {
        zeta_base: base,
        zeta,
        x_base,
        x_tp: x_base.into(),
        delta,
        interval: (lo, hi),
        g,
        g1,
        g2,
        b,
        b1,
        b2,
        rho: CCheb::fit(0.0, 1.0, 2, |_| 0.0.into()),
        rho1: CCheb::fit(0.0, 1.0, 2, |_| 0.0.into()),
        rho2: CCheb::fit(0.0, 1.0, 2, |_| 0.0.into()),
    };
    ld.x_tp = newton_turning_point(&ld, x_base.into())?;
    if zeta.im == 0.0 {
        // ζ = u would add a second singularity of T inside the interval.
        for k in 0..=64 {
            let x = lo + (hi - lo) * k as f64 / 64.0;
            let u = rep.state_at_x(x)?.u;
            if (zeta.re - u).abs() < 1e-8 {
                return Err(Error::domain(format!("ζ = u crossing at x = {x} inside the Langer interval")));
            }
        }
    }
    let rho = CCheb::fit(lo, hi, N_CHEB, |x| ld.rho_direct(x.into()));
    ld.rho1 = rho.derivative();
    ld.rho2 = ld.rho1.derivative();
    ld.rho = rho;
    Ok(ld)
}

fn d_variation(ld_probe: &LangerData, lo: f64, hi: f64) -> f64 {
    let (mut mn, mut mx) = (f64::INFINITY, 0.0f64);
    for k in 0..=32 {
        let x = lo + (hi - lo) * k as f64 / 32.0;
        let d = ld_probe.d_fun(x.into()).norm();
        mn = mn.min(d);
        mx = mx.max(d);
    }
    mx / mn
}

fn choose_delta(rep: &ProfileRep, zeta: C64, base: C64, x_base: f64, cap: f64, allow_negative: bool) -> Result<LangerData> {
    let mut delta = cap;
    for _ in 0..12 {
        let ld = build_common(rep, zeta, base, x_base, delta, allow_negative)?;
        if d_variation(&ld, ld.interval.0, ld.interval.1) < 1.5 {
            return Ok(ld);
        }
        delta *= 0.5;
    }
    Err(Error::numerical("no Langer interval with |d| variation below 50%"))
}

/// Langer data for ζ near an interior III₊ frequency. The base frequency is
/// i|ζ|, whose turning point is real.
pub fn langer_build(rep: &ProfileRep, zeta: C64, opts: &LangerOptions) -> Result<LangerData> {
    let base = c64(0.0, zeta.norm());
    let x_base = match turning_point(rep, base)? {
        XCoord::Finite(x) if x > 0.0 => x,
        _ => return Err(Error::domain(format!("ζ = {zeta} is not an interior III₊ frequency"))),
    };
    match opts.delta {
        Some(d) => build_common(rep, zeta, base, x_base, d, false),
        None => {
            let cap = (x_base / 2.2).min((rep.x_max_default() - x_base) / 2.2).min(0.5);
            choose_delta(rep, zeta, base, x_base, cap, false)
        }
    }
}

/// Langer data around the turning point x = 0 of ζ₀, using the profile
/// continued to λ > 1 for x < 0.
pub fn langer_build_at_zero(rep: &ProfileRep, zeta: C64, opts: &LangerOptions) -> Result<LangerData> {
    let base = c64(0.0, rep.zeta0_abs());
    match opts.delta {
        Some(d) => build_common(rep, zeta, base, 0.0, d, true),
        None => choose_delta(rep, zeta, base, 0.0, 0.25, true),
    }
}

/// θ± without the factor e^{φ₀/h}, in a common scale: the true vector is
/// `mant · exp(ln_factor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryApproximant {
    pub mant: CVec5,
    pub ln_factor: C64,
    /// a̲θ + hθ' − Gθ in the same scale (leading-order defect).
    pub defect: CVec5,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub minus: AiryApproximant,
    pub plus: AiryApproximant,
}

/// φ₀(x) = ∫₀ˣ a̲ with a̲ = −κ²ζ/(ηu).
pub fn phase_a_under(rep: &ProfileRep, zeta: C64, x: f64) -> C64 {
    let f = |s: f64| {
        let p = rep.state_at_x(s).expect("profile state");
        -p.kappa() * p.kappa() / (p.eta() * p.u)
    };
    let (v, _) = integrate(f, 0.0, x, 1e-14, 1e-12);
    zeta * v
}

/// Leading Airy approximants θ₋, θ₊ at real x in the Langer interval.
pub fn airy_pair(ld: &LangerData, rep: &ProfileRep, x: f64, h: f64) -> Result<AiryPair> {
    let zeta = ld.zeta;
    let pt = rep.state_at_x(x)?;
    let sd = spectral_point(&rep.gas, &pt, zeta);
    let (dp0, dq0, _) = basis_dlambda(&rep.gas, &pt, zeta);
    let lx = C64::from(pt.lam_x);
    let (p0, q0, p0x, q0x) = (sd.p0, sd.q0, dp0 * lx, dq0 * lx);
    let g = generator_parts(&rep.gas, &pt).generator(zeta, h);
    let b = C64::from(-pt.kappa() / (pt.eta() * pt.u));
    let (_, bx) = ld.b_under(x);
    let a_under = -pt.kappa() * pt.kappa() * zeta / (pt.eta() * pt.u);
    let (rho, rx, rxx) = (ld.rho(x), ld.rho_x(x), ld.rho_xx(x));
    // ρ_x ≈ negative real; take roots with the cut on the positive axis.
    let sq_rx = I * (-rx).sqrt();
    let sq_b = b.sqrt();
    let phi0 = phase_a_under(rep, zeta, x) / h;
    let h13 = h.cbrt();
    let one = |omega: C64| {
        let zarg = rho * omega / (h13 * h13);
        let zx = rx * omega / (h13 * h13);
        let ai = airy_scaled(zarg);
        let (a, ap) = (ai.ai, ai.aip);
        let f1 = sq_b / sq_rx;
        let f2 = sq_rx / sq_b * h13 * omega;
        let l1 = bx / (2.0 * b) - rxx / (2.0 * rx);
        let (f1x, f2x) = (f1 * l1, -f2 * l1);
        let th = p0 * (f1 * a) + q0 * (f2 * ap);
        let th_x = (p0 * f1x + p0x * f1) * a + p0 * (f1 * zx * ap) + (q0 * f2x + q0x * f2) * ap + q0 * (f2 * zx * zarg * a);
        let defect = th * a_under + th_x * C64::from(h) - g * th;
        AiryApproximant { mant: th, ln_factor: phi0 + ai.log_scale, defect }
    };
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    Ok(AiryPair { minus: one(w.conj()), plus: one(w) })
}

impl AiryApproximant {
    pub fn relative_defect(&self) -> f64 {
        self.defect.norm() / self.mant.norm()
    }
}

/// Regime A/B split near ζ₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroRegime {
    A,
    B,
}

/// Regime A iff |ρ(0, ζ)| h^{−2/3} ≤ m.
pub fn regime_at_zero(ld: &LangerData, h: f64, m: f64) -> (ZeroRegime, f64) {
    let r = ld.rho_direct(C64::from(0.0)).norm() / h.powf(2.0 / 3.0);
    (if r <= m { ZeroRegime::A } else { ZeroRegime::B }, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    I,
    II,
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeOptions {
    pub k: f64,
    pub delta: f64,
    /// Neighborhood radius as a fraction of |ζ∞|.
    pub r_omega: f64,
}

impl Default for RegimeOptions {
    fn default() -> Self {
        RegimeOptions { k: 10.0, delta: 0.3, r_omega: 0.25 }
    }
}

/// Variables of the Bessel-type reduction near ζ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeData {
    pub zeta: C64,
    pub h: f64,
    pub zeta_inf: C64,
    /// α² = i(ζ − ζ∞), principal root.
    pub alpha: C64,
    pub beta: C64,
    pub alpha_t: C64,
    pub beta_t: C64,
    pub gamma_t: C64,
    /// D(∞, ζ) = (−iζ + c₀√η(∞)) b̲²(∞).
    pub d_inf: C64,
    /// e(x) e^{μx} → a as x → ∞, with e = c₀√η(x) − c₀√η(∞).
    pub a_coef: f64,
    pub mu: f64,
    pub regime: Regime,
    pub k: f64,
    pub delta: f64,
}

impl RegimeData {
    /// t(x) = (2/μ) √(a D(∞,ζ)) e^{−μx/2}.
    pub fn t_map(&self, x: f64) -> C64 {
        (self.a_coef * self.d_inf).sqrt() * (2.0 / self.mu) * (-0.5 * self.mu * x).exp()
    }

    /// m(x) = e(x) e^{μx} − a.
    pub fn m_fun(&self, rep: &ProfileRep, x: f64) -> Result<f64> {
        Ok(e_fun(rep, x)? * (self.mu * x).exp() - self.a_coef)
    }
}

fn e_fun(rep: &ProfileRep, x: f64) -> Result<f64> {
    Ok(rep.state_at_x(x)?.c0sq_eta().sqrt() - rep.endstate.c0sq_eta().sqrt())
}

pub fn regime_classify_infinity(rep: &ProfileRep, zeta: C64, h: f64, opts: &RegimeOptions) -> Result<RegimeData> {
    let c_inf = rep.endstate.c0sq_eta().sqrt();
    let zeta_inf = c64(0.0, c_inf);
    if !((zeta - zeta_inf).norm() <= opts.r_omega * c_inf) || zeta.re < 0.0 {
        return Err(Error::domain(format!("ζ = {zeta} outside the ζ∞ neighborhood")));
    }
    if !(h > 0.0) {
        return Err(Error::domain(format!("h = {h} must be positive")));
    }
    let e = rep.endstate;
    let b_inf = -e.kappa() / (e.eta() * e.u);
    let d_inf = (-I * zeta + c_inf) * (b_inf * b_inf);
    let alpha = (I * (zeta - zeta_inf)).sqrt();
    let alpha_t = alpha * d_inf.sqrt() * (2.0 / rep.mu);
    let beta_t = alpha_t / h;
    // λ e^{μx} → Λ and e = (c₀√η)_λ(0) λ + O(λ²).
    let a_coef = e.c0sq_eta_l() / (2.0 * c_inf) * rep.big_lambda;
    let arg = beta_t.arg();
    let regime = if beta_t.norm() <= opts.k {
        Regime::III
    } else if arg >= PI / 2.0 - opts.delta {
        Regime::II
    } else {
        Regime::I
    };
    Ok(RegimeData {
        zeta,
        h,
        zeta_inf,
        alpha,
        beta: alpha / h,
        alpha_t,
        beta_t,
        gamma_t: -I * beta_t,
        d_inf,
        a_coef,
        mu: rep.mu,
        regime,
        k: opts.k,
        delta: opts.delta,
    })
}

/// (w, h w_x) sharing a real exponent: values are `· exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarPair {
    pub w: C64,
    pub hw_x: C64,
    pub log_scale: f64,
}

/// ξ(σ) for Regime I with the perturbation dropped.
pub fn xi_regime1(sigma: C64) -> C64 {
    let r = (C64::from(1.0) + sigma * sigma).sqrt();
    r + (sigma / (1.0 + r)).ln()
}

/// Ξ(σ) for Regime II, with (σ²−1)^{1/2} positive for σ > 1 and cut on [0, 1].
pub fn big_xi_regime2(sigma: C64) -> C64 {
    let r = (sigma - 1.0).sqrt() * (sigma + 1.0).sqrt();
    r + I * ((C64::from(1.0) + I * r) / sigma).ln()
}

/// ξ = (3Ξ/2)^{2/3}, continued analytically through σ = 1 so that the
/// segment (0, 1) lands on the negative axis from either side.
pub fn xi_regime2(sigma: C64) -> C64 {
    let c = big_xi_regime2(sigma) * 1.5;
    let mut arg = c.arg();
    let upper = sigma.im > 0.0 || (sigma.im == 0.0 && sigma.re < 1.0);
    if upper && arg < -PI / 4.0 {
        arg += 2.0 * PI;
    } else if sigma.im < 0.0 && arg > PI / 4.0 {
        arg -= 2.0 * PI;
    }
    C64::from_polar(c.norm().powf(2.0 / 3.0), 2.0 * arg / 3.0)
}

/// Leading term of the bounded (Re ζ = 0) or decaying solution of the
/// scalar equation on [M, ∞), perturbation f_p and error terms dropped.
pub fn leading_infinity_solution(rd: &RegimeData, x: f64) -> Result<ScalarPair> {
    let h = rd.h;
    let mu = rd.mu;
    let t = rd.t_map(x);
    let z = t / h;
    match rd.regime {
        Regime::I => {
            let s = z / rd.beta_t;
            let r = (C64::from(1.0) + s * s).sqrt();
            let xi = xi_regime1(s);
            let xi_s = r / s;
            let ln_w = -0.5 * z.ln() - 0.5 * xi_s.ln() + rd.beta_t * xi;
            // d/dx ln w with σ_x = −μσ/2 and z_x = −μz/2.
            let dlog = mu / 4.0 + (mu / 4.0) * (s * s / (C64::from(1.0) + s * s) - 1.0) - rd.beta_t * r * (mu / 2.0);
            Ok(scaled_pair(ln_w, dlog * h))
        }
        Regime::II => {
            let s = z / rd.gamma_t;
            if (s - 1.0).norm() < 1e-8 {
                return Err(Error::domain("σ at the turning point σ = 1"));
            }
            if s.im == 0.0 && s.re <= 0.0 {
                return Err(Error::domain("σ on the negative branch cut"));
            }
            let xi = xi_regime2(s);
            let big_xi_s = (s - 1.0).sqrt() * (s + 1.0).sqrt() / s;
            let half = C64::from_polar(xi.norm().sqrt(), 0.5 * xi.arg());
            let xi_s = big_xi_s / half;
            let g23 = rd.gamma_t.powf(2.0 / 3.0);
            let ai = airy_rotated_scaled(1, g23 * xi);
            let ln_w = -0.5 * z.ln() - 0.5 * xi_s.ln() + ai.ai.ln() + ai.log_scale;
            let dlog_xis = s / (s * s - 1.0) - 0.5 * xi_s / xi - 1.0 / s;
            let sx = -0.5 * mu * s;
            let dlog = mu / 4.0 - 0.5 * dlog_xis * sx + ai.aip / ai.ai * g23 * xi_s * sx;
            Ok(scaled_pair(ln_w, dlog * h))
        }
        Regime::III => {
            // w ∝ I_β̃(t/h).
            let bi = bessel_i(rd.beta_t, z)?;
            let v = bi.value();
            let ln_w = v.mant.ln() + v.log_scale;
            let dlog = bi.log_derivative() * (-0.5 * mu * z);
            Ok(scaled_pair(ln_w, dlog * h))
        }
    }
}

fn scaled_pair(ln_w: C64, h_dlog: C64) -> ScalarPair {
    let w = C64::from_polar(1.0, ln_w.im);
    ScalarPair { w, hw_x: w * h_dlog, log_scale: ln_w.re }
}

/// θ = Y(x)(K(x)(w, h w_x), 0) at grid node j of a block decomposition,
/// without the e^{φ₀/h} factor.
pub fn reconstruct_theta(rep: &ProfileRep, dec: &BlockDecomp, sr: &ScalarReduction, j: usize, pair: &ScalarPair) -> Result<CVec5> {
    let (k, _) = sr.k_parts(dec.xs[j]);
    let phi = k * nalgebra::Vector2::new(pair.w, pair.hw_x);
    let y = dec.y_at(rep, j)?;
    Ok(y * CVec5::new(phi[0], phi[1], C64::from(0.0), C64::from(0.0), C64::from(0.0)))
}

/// Class/regime row for the `regimes` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub zeta: C64,
    pub h: f64,
    pub class: ClassInfo,
    pub regime: Option<Regime>,
    /// None stands for x = ∞ or no turning point.
    pub x_tp: Option<f64>,
    pub at_infinity: bool,
}

pub fn regime_row(rep: &ProfileRep, zeta: C64, h: f64, opts: &RegimeOptions) -> RegimeRow {
    let info = classify_class(rep, zeta);
    let regime = regime_classify_infinity(rep, zeta, h, opts).ok().map(|r| r.regime);
    let tp = turning_point(rep, zeta).ok();
    RegimeRow {
        zeta,
        h,
        class: info,
        regime,
        x_tp: tp.and_then(|t| t.finite()),
        at_infinity: matches!(tp, Some(XCoord::Infinity)),
    }
}
