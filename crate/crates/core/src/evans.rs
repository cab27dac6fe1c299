//! Decaying solution θ(x, ζ, h), the stability function V(ζ, h) and the von
//! Neumann function L₁(ζ).
//!
//! θ is integrated backward from X_max in the gauge `θ = e^{∫μ₁/h} θ̃`, so
//! θ̃ stays O(1) while the other modes decay in the direction of
//! integration.

use crate::linsys::{generator_parts, s_branch, spectral_point, CMat5, CVec5};
use crate::ode::{Dopri5, Options, Stats, System};
use crate::profile::ProfileRep;
use crate::{Error, Result, C64, I};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvansOptions {
    /// Truncation point; `None` uses max(30/μ, 30).
    pub x_max: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for EvansOptions {
    fn default() -> Self {
        EvansOptions { x_max: None, rtol: 1e-10, atol: 1e-14 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub x_max: f64,
    pub rtol: f64,
    pub steps: Stats,
    pub renormalizations: usize,
    /// min over accepted steps of |s(x, ζ)|.
    pub min_abs_s: f64,
    /// Set when the gauge passes within 1e−3 of a turning point.
    pub turning_warning: bool,
    /// Set when the eigenvector at infinity came from the explicit
    /// block-triangular formula without inverse-iteration refinement.
    pub jordan_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvansResult {
    pub zeta: C64,
    pub h: f64,
    /// θ(0) scaled to unit norm with θ₀ᴴT₁(0) real and positive.
    pub theta0: Vec<C64>,
    /// θ_true(0) = e^{log_scale} θ₀ for the decaying solution normalized
    /// by its eigenvector at infinity.
    pub log_scale: C64,
    pub v: C64,
    pub l1: C64,
    pub theta1_residual: f64,
    pub diagnostics: Diagnostics,
}

/// Eigenpair of G(∞, ζ, h) continuing μ₁(∞, ζ).
///
/// Rows 1–4 of G(∞) have no λ-column, so G(∞) is block lower triangular:
/// μ₁* = μ₁(∞, ζ) and the eigenvector is T₁(∞) completed in its fifth slot.
pub fn limiting_mu1_vector(rep: &ProfileRep, zeta: C64, h: f64) -> Result<(C64, CVec5, bool)> {
    if !(zeta.re >= 0.0) {
        return Err(Error::domain(format!("Re ζ < 0: {zeta}")));
    }
    let pt = rep.endstate;
    let g = generator_parts(&rep.gas, &pt).generator(zeta, h);
    let sd = spectral_point(&rep.gas, &pt, zeta);
    let mu = sd.mu[0];
    let mut e = sd.t_col(0);
    let denom = mu - g[(4, 4)];
    e[4] = (g[(4, 0)] * e[0] + g[(4, 1)] * e[1] + g[(4, 2)] * e[2] + g[(4, 3)] * e[3]) / denom;
    let scale = g.norm() * e.norm();
    let resid = |lam: C64, v: &CVec5| (g * v - v * lam).norm();
    if resid(mu, &e) <= 1e-12 * scale {
        return Ok((mu, e / C64::new(e.norm(), 0.0), false));
    }
    // Shifted inverse iteration from the explicit pair.
    let mut lam = mu;
    let mut v = e / C64::new(e.norm(), 0.0);
    let shift = lam + C64::new(1e-9 * scale.max(1.0), 0.0);
    let lu = (g - CMat5::identity() * shift).lu();
    for _ in 0..10 {
        let Some(w) = lu.solve(&v) else { break };
        v = w / C64::new(w.norm(), 0.0);
        lam = (v.adjoint() * g * v)[(0, 0)];
        if resid(lam, &v) <= 1e-12 * g.norm() {
            return Ok((lam, v, false));
        }
    }
    // Collision of μ₁ and μ₂ at ζ∞: the explicit vector is still the
    // unique eigenvector of the Jordan block.
    Ok((mu, e / C64::new(e.norm(), 0.0), true))
}

/// Backward system for θ̃ plus ln λ and ∫μ₁ dx.
struct GaugeSystem<'a> {
    rep: &'a ProfileRep,
    zeta: C64,
    h: f64,
}

const N_STATE: usize = 13;

impl GaugeSystem<'_> {
    fn eval(&self, y: &[f64], dy: &mut [f64]) -> C64 {
        let lam = y[10].exp();
        let pt = self.rep.state_of_lambda(lam).expect("profile state along the integration");
        let gp = generator_parts(&self.rep.gas, &pt);
        let sd = spectral_point(&self.rep.gas, &pt, self.zeta);
        let mu1 = sd.mu[0];
        let g = gp.generator(self.zeta, self.h);
        let th = CVec5::from_fn(|i, _| C64::new(y[2 * i], y[2 * i + 1]));
        let d = (g * th - th * mu1) / C64::new(self.h, 0.0);
        for i in 0..5 {
            dy[2 * i] = d[i].re;
            dy[2 * i + 1] = d[i].im;
        }
        dy[10] = pt.hh;
        dy[11] = mu1.re;
        dy[12] = mu1.im;
        sd.s
    }
}

impl System for GaugeSystem<'_> {
    fn dim(&self) -> usize {
        N_STATE
    }
    fn rhs(&mut self, _x: f64, y: &[f64], dy: &mut [f64]) {
        self.eval(y, dy);
    }
    fn error_weights(&self, y: &[f64], y_new: &[f64], rtol: f64, atol: f64, w: &mut [f64]) {
        let sup = |v: &[f64]| v[..10].iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let th = sup(y).max(sup(y_new));
        for wi in w[..10].iter_mut() {
            *wi = atol + rtol * th;
        }
        for i in 10..N_STATE {
            w[i] = atol + rtol * y[i].abs().max(y_new[i].abs()).max(1.0);
        }
    }
}

/// Decaying solution on the way from X_max to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayingSolution {
    /// (x, θ̃(x)) at requested sample points, in the order given.
    pub samples: Vec<(f64, CVec5)>,
    /// θ̃(0) as integrated (not unit-normalized).
    pub theta0: CVec5,
    /// θ(0) = e^{log_scale} θ̃(0).
    pub log_scale: C64,
    pub diagnostics: Diagnostics,
}

fn theta_of(y: &[f64]) -> CVec5 {
    CVec5::from_fn(|i, _| C64::new(y[2 * i], y[2 * i + 1]))
}

/// Integrate the decaying solution backward from X_max to 0. `samples`
/// must be decreasing points of (0, X_max).
pub fn decaying_solution(rep: &ProfileRep, zeta: C64, h: f64, opts: &EvansOptions, samples: &[f64]) -> Result<DecayingSolution> {
    if !(zeta.re >= 0.0) {
        return Err(Error::domain(format!("Re ζ < 0: {zeta}")));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::domain(format!("h = {h} outside (0, 1]")));
    }
    let x_max = opts.x_max.unwrap_or_else(|| rep.x_max_default());
    if !(x_max > 0.0) {
        return Err(Error::Config(format!("x_max = {x_max} must be positive")));
    }
    let (_, e1, jordan) = limiting_mu1_vector(rep, zeta, h)?;
    let mut y0 = [0.0; N_STATE];
    for i in 0..5 {
        y0[2 * i] = e1[i].re;
        y0[2 * i + 1] = e1[i].im;
    }
    y0[10] = -rep.tau_of_x(x_max)?;
    let sys = GaugeSystem { rep, zeta, h };
    let ode_opts = Options { rtol: opts.rtol, atol: opts.atol, ..Options::default() };
    let mut ig = Dopri5::new(sys, x_max, &y0, ode_opts);
    let probe = GaugeSystem { rep, zeta, h };
    let mut renorm = 0usize;
    let mut log_norm = 0.0;
    let mut min_s = f64::INFINITY;
    let mut out = Vec::with_capacity(samples.len());
    let mut scratch = [0.0; N_STATE];
    let targets = samples.iter().copied().chain(std::iter::once(0.0));
    for xt in targets {
        if !(xt >= 0.0 && xt <= x_max) {
            return Err(Error::domain(format!("sample point {xt} outside [0, {x_max}]")));
        }
        let mut step_err = None;
        let res = ig.advance_with(xt, |_, y| {
            let s = probe.eval(y, &mut scratch);
            min_s = min_s.min(s.norm());
            let n = theta_of(y).norm();
            if !n.is_finite() || n == 0.0 {
                step_err = Some(Error::numerical("decaying solution lost"));
                return false;
            }
            if !(1e-3..=1e3).contains(&n) {
                for v in y[..10].iter_mut() {
                    *v /= n;
                }
                log_norm += n.ln();
                renorm += 1;
                return true;
            }
            false
        });
        res?;
        if let Some(e) = step_err {
            return Err(e);
        }
        if xt > 0.0 {
            out.push((xt, theta_of(&ig.y)));
        }
    }
    // Gauge factor exp((1/h)∫_{X}^{0} μ₁ dx) accumulated in y[11..13].
    let gauge = C64::new(ig.y[11], ig.y[12]) / h;
    let diagnostics = Diagnostics {
        x_max,
        rtol: opts.rtol,
        steps: ig.stats,
        renormalizations: renorm,
        min_abs_s: min_s,
        turning_warning: min_s < 1e-3,
        jordan_fallback: jordan,
    };
    Ok(DecayingSolution { samples: out, theta0: theta_of(&ig.y), log_scale: gauge + log_norm, diagnostics })
}

/// min_c ‖c θ₀ − T₁‖ / ‖T₁‖.
pub fn type_theta1_residual(theta0: &CVec5, t1: &CVec5) -> Result<f64> {
    let n0 = theta0.norm_squared();
    let n1 = t1.norm();
    if n0 == 0.0 || n1 == 0.0 {
        return Err(Error::domain("residual needs nonzero vectors"));
    }
    let c = theta0.dotc(t1) / n0;
    Ok((theta0 * c - t1).norm() / n1)
}

/// Shock data entering V and L₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpData {
    pub v_minus: f64,
    pub v_plus: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub t_plus: f64,
    pub eta_plus: f64,
    pub kappa_plus: f64,
    pub c0sq_eta_plus: f64,
    pub p_s_plus: f64,
    pub m: f64,
    pub g_plus: f64,
    pub chi_v: f64,
    pub ell_plus: f64,
    pub h_t: [f64; 5],
    pub h_y3: f64,
    /// (v, u, 0, S, λ) at 0+.
    pub p_plus: [f64; 5],
}

pub fn jump_data(rep: &ProfileRep) -> JumpData {
    let p = rep.plus;
    let (vm, vp) = (rep.v_minus, p.v);
    let m = rep.m;
    let eta = p.eta();
    let t = p.t;
    let dv = vm - vp;
    let g_plus = t - 0.5 * dv * p.p_s;
    let chi_v = vp / vm;
    let ell_plus = 2.0 - (1.0 - eta) * (1.0 - chi_v) * vm * p.p_s / t;
    let f = dv / (vm * t * eta);
    let h_t = [
        f * 2.0 * (1.0 - eta) * g_plus / m,
        f * (t * eta + 2.0 * (1.0 - eta) * g_plus),
        0.0,
        -f * m * dv * eta,
        0.0,
    ];
    JumpData {
        v_minus: vm,
        v_plus: vp,
        u_minus: rep.u_minus,
        u_plus: p.u,
        t_plus: t,
        eta_plus: eta,
        kappa_plus: p.kappa(),
        c0sq_eta_plus: p.c0sq_eta(),
        p_s_plus: p.p_s,
        m,
        g_plus,
        chi_v,
        ell_plus,
        h_t,
        h_y3: m * dv,
        p_plus: [vp, p.u, 0.0, p.s, p.lambda],
    }
}

fn bilinear(a: &CVec5, b: &[C64; 5]) -> C64 {
    (0..5).map(|i| a[i] * b[i]).sum()
}

/// ζh_t + ih_y.
pub fn boundary_vector(jd: &JumpData, zeta: C64) -> [C64; 5] {
    let mut w = jd.h_t.map(|v| zeta * v);
    w[2] += I * jd.h_y3;
    w
}

/// V = θ₀·P(0+) − θ₀·(ζh_t + ih_y)/h with the bilinear pairing.
pub fn stability_v(jd: &JumpData, theta0: &CVec5, zeta: C64, h: f64) -> C64 {
    let p = jd.p_plus.map(|v| C64::new(v, 0.0));
    bilinear(theta0, &p) - bilinear(theta0, &boundary_vector(jd, zeta)) / h
}

/// Von Neumann shock stability function.
pub fn l1(jd: &JumpData, zeta: C64) -> C64 {
    let s = s_branch(zeta, jd.c0sq_eta_plus);
    let (up, um) = (jd.u_plus, jd.u_minus);
    let e = jd.eta_plus;
    -um * (1.0 - jd.chi_v) / e * (jd.ell_plus * zeta * (zeta + jd.kappa_plus * s) / (up * um) + e * (1.0 - zeta * zeta / (up * um)))
}

/// −T₁(0, ζ)·(ζh_t + ih_y), the second form of L₁.
pub fn l1_from_t1(rep: &ProfileRep, jd: &JumpData, zeta: C64) -> C64 {
    let t1 = spectral_point(&rep.gas, &rep.plus, zeta).t_col(0);
    -bilinear(&t1, &boundary_vector(jd, zeta))
}

/// Full pipeline at one (ζ, h).
pub fn evans(rep: &ProfileRep, zeta: C64, h: f64, opts: &EvansOptions) -> Result<EvansResult> {
    let sol = decaying_solution(rep, zeta, h, opts, &[])?;
    let t1 = spectral_point(&rep.gas, &rep.plus, zeta).t_col(0);
    let th = sol.theta0;
    let n = th.norm();
    // Phase so that θ₀ᴴT₁ is real and positive.
    let pr = th.dotc(&t1);
    let phase = if pr.norm() > 0.0 { pr / pr.norm() } else { C64::new(1.0, 0.0) };
    let k = phase / n;
    let theta0 = th * k;
    let log_scale = sol.log_scale - k.ln();
    let jd = jump_data(rep);
    Ok(EvansResult {
        zeta,
        h,
        theta0: theta0.iter().copied().collect(),
        log_scale,
        v: stability_v(&jd, &theta0, zeta, h),
        l1: l1(&jd, zeta),
        theta1_residual: type_theta1_residual(&theta0, &t1)?,
        diagnostics: sol.diagnostics,
    })
}

pub fn theta0_vec(r: &EvansResult) -> CVec5 {
    CVec5::from_iterator(r.theta0.iter().copied())
}
