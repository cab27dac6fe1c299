//! Steady strong-detonation profile.
//!
//! Mass, momentum and energy are conserved through the reaction zone, so the
//! state is an algebraic function of λ (subsonic root of a quadratic in v).
//! Position follows from `λ' = λ H(λ)` by quadrature in `τ = −ln λ`.

use crate::quad::{self, gauss_legendre};
use crate::thermo::{self, GasModel, ThermoState};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Detonation speed, given directly or as overdrive `f = (D/D_CJ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetSpeed {
    Speed(f64),
    Overdrive(f64),
}

/// Upstream state (λ = 1) and detonation speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockSetup {
    pub v_minus: f64,
    pub p_minus: f64,
    pub speed: DetSpeed,
}

/// Position along the profile; λ = 0 sits at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum XCoord {
    Finite(f64),
    Infinity,
}

impl XCoord {
    pub fn finite(&self) -> Option<f64> {
        match self {
            XCoord::Finite(x) => Some(*x),
            XCoord::Infinity => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileType {
    TypeD,
    TypeI,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeReport {
    pub kind: ProfileType,
    /// min and max over the grid of d/dx(c₀² − u²).
    pub min: f64,
    pub max: f64,
    /// True when the derivative is negligible everywhere (inert profile).
    pub degenerate: bool,
}

/// Profile state at one λ together with λ-derivatives and `λ' = λH(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub lambda: f64,
    pub v: f64,
    pub u: f64,
    pub s: f64,
    pub p: f64,
    pub t: f64,
    pub c0sq: f64,
    pub p_v: f64,
    pub p_s: f64,
    pub v_l: f64,
    pub u_l: f64,
    pub s_l: f64,
    pub p_l: f64,
    pub t_l: f64,
    pub c0sq_l: f64,
    pub p_v_l: f64,
    pub p_s_l: f64,
    /// H(λ) = r/(λu) < 0.
    pub hh: f64,
    /// dλ/dx.
    pub lam_x: f64,
}

impl ProfilePoint {
    pub fn kappa(&self) -> f64 {
        self.u / self.c0sq.sqrt()
    }
    pub fn eta(&self) -> f64 {
        1.0 - self.u * self.u / self.c0sq
    }
    /// c₀²η = c₀² − u².
    pub fn c0sq_eta(&self) -> f64 {
        self.c0sq - self.u * self.u
    }
    pub fn c0sq_eta_l(&self) -> f64 {
        self.c0sq_l - 2.0 * self.u * self.u_l
    }
    pub fn thermo_state(&self) -> ThermoState {
        ThermoState::new(self.v, self.s, self.lambda)
    }
}

/// Step in τ of the x(τ) table.
const TAU_STEP: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct ProfileRep {
    pub gas: GasModel,
    pub det_speed: f64,
    pub d_cj: f64,
    pub m: f64,
    pub mom: f64,
    pub h_total: f64,
    pub lambda0: f64,
    pub mu: f64,
    pub v_minus: f64,
    pub p_minus: f64,
    pub s_minus: f64,
    pub u_minus: f64,
    pub plus: ProfilePoint,
    pub endstate: ProfilePoint,
    /// lim λ e^{μx}.
    pub big_lambda: f64,
    qa: f64,
    qb: f64,
    x_table: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
    type_cache: OnceLock<TypeReport>,
}

/// Discriminant of the λ = 0 quadratic as a function of D.
fn burnt_discriminant(g: &GasModel, v_m: f64, p_m: f64, d: f64) -> f64 {
    let gg = g.gamma;
    let m = d / v_m;
    let mom = p_m + m * m * v_m;
    let h = gg / (gg - 1.0) * p_m * v_m + g.q_release + 0.5 * d * d;
    let a = (gg + 1.0) / (2.0 * (gg - 1.0)) * m * m;
    let b = -gg / (gg - 1.0) * mom;
    b * b - 4.0 * a * h
}

/// Chapman–Jouguet speed: the smallest D for which the burnt state exists.
pub fn cj_speed(g: &GasModel, v_minus: f64, p_minus: f64) -> Result<f64> {
    g.validate()?;
    let c0 = (g.gamma * p_minus * v_minus).sqrt();
    let mut lo = c0;
    let mut hi = 2.0 * c0;
    let mut tries = 0;
    while burnt_discriminant(g, v_minus, p_minus, hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::construction("CJ speed bracketing failed"));
        }
    }
    if burnt_discriminant(g, v_minus, p_minus, lo) >= 0.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if burnt_discriminant(g, v_minus, p_minus, mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Post-shock state (λ frozen at 1) and u(0+).
pub fn rankine_hugoniot_vn(g: &GasModel, setup: &ShockSetup) -> Result<(ThermoState, f64)> {
    let rep = ProfileRep::build(g, setup)?;
    Ok((rep.plus.thermo_state(), rep.plus.u))
}

impl ProfileRep {
    pub fn build(g: &GasModel, setup: &ShockSetup) -> Result<Self> {
        g.validate()?;
        let (v_m, p_m) = (setup.v_minus, setup.p_minus);
        if !(v_m > 0.0 && p_m > 0.0) {
            return Err(Error::Config("upstream volume and pressure must be positive".into()));
        }
        let d_cj = cj_speed(g, v_m, p_m)?;
        let d = match setup.speed {
            DetSpeed::Speed(d) => d,
            DetSpeed::Overdrive(f) => {
                if !(f > 1.0) {
                    return Err(Error::Config(format!("overdrive {f} must exceed 1")));
                }
                f.sqrt() * d_cj
            }
        };
        let c0m = (g.gamma * p_m * v_m).sqrt();
        if !(d > c0m) {
            return Err(Error::construction(format!("upstream flow not supersonic: D = {d}, c0 = {c0m}")));
        }
        let gg = g.gamma;
        let m = d / v_m;
        let mom = p_m + m * m * v_m;
        let h_total = gg / (gg - 1.0) * p_m * v_m + g.q_release + 0.5 * d * d;
        let qa = (gg + 1.0) / (2.0 * (gg - 1.0)) * m * m;
        let qb = -gg / (gg - 1.0) * mom;
        let t_m = p_m * v_m / g.r_gas;
        let s_minus = g.entropy_of(v_m, t_m);
        let mut rep = ProfileRep {
            gas: *g,
            det_speed: d,
            d_cj,
            m,
            mom,
            h_total,
            lambda0: 1.0,
            mu: 0.0,
            v_minus: v_m,
            p_minus: p_m,
            s_minus,
            u_minus: d,
            plus: zero_point(),
            endstate: zero_point(),
            big_lambda: 0.0,
            qa,
            qb,
            x_table: Vec::new(),
            gl: gauss_legendre(10),
            type_cache: OnceLock::new(),
        };
        // Post-shock volume from the product of roots at λ = 1.
        let c1 = h_total - g.q_release;
        let v_plus = c1 / (qa * v_m);
        rep.plus = rep.point_at(1.0, v_plus)?;
        if !(v_plus < v_m) {
            return Err(Error::construction("shock does not compress: D too close to the sound speed"));
        }
        rep.endstate = rep.state_of_lambda(0.0)?;
        rep.mu = -rep.endstate.hh;
        // Assumption: subsonic reaction zone.
        let kmax = (0..=512).map(|j| rep.state_of_lambda(j as f64 / 512.0).map(|p| p.kappa())).try_fold(0.0f64, |acc, k| k.map(|k| acc.max(k)))?;
        if !(kmax < 1.0 - 1e-6) {
            return Err(Error::construction(format!("reaction zone not subsonic: max u/c0 = {kmax}")));
        }
        rep.build_x_table()?;
        Ok(rep)
    }

    fn point_at(&self, lambda: f64, v: f64) -> Result<ProfilePoint> {
        let g = &self.gas;
        let gg = g.gamma;
        let m = self.m;
        let p = self.mom - m * m * v;
        let t = p * v / g.r_gas;
        let s = g.entropy_of(v, t);
        let u = m * v;
        let st = ThermoState::new(v, s, lambda);
        let pr = thermo::pressure(g, &st)?;
        let c0sq = thermo::sound_speed_sq(g, &st)?;
        let denom = (gg + 1.0) * m * m * v - gg * self.mom;
        let v_l = g.q_release * (gg - 1.0) / denom;
        let p_l = -m * m * v_l;
        let t_l = (p_l * v + p * v_l) / g.r_gas;
        let s_l = g.c_v() * t_l / t + g.r_gas * v_l / v;
        let u_l = m * v_l;
        let c0sq_l = gg * (p_l * v + p * v_l);
        let p_v_l = -gg * (p_l * v - p * v_l) / (v * v);
        let p_s_l = p_l / g.c_v();
        let hh = -g.k_rate * (-g.e_act / (g.r_gas * t)).exp() / u;
        Ok(ProfilePoint {
            lambda,
            v,
            u,
            s,
            p: pr.value,
            t,
            c0sq,
            p_v: pr.d_v,
            p_s: pr.d_s,
            v_l,
            u_l,
            s_l,
            p_l,
            t_l,
            c0sq_l,
            p_v_l,
            p_s_l,
            hh,
            lam_x: lambda * hh,
        })
    }

    /// Profile state on the subsonic branch at reactant fraction λ. Values
    /// slightly above 1 continue the profile analytically into x < 0.
    pub fn state_of_lambda(&self, lambda: f64) -> Result<ProfilePoint> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("λ = {lambda} outside [0, 1]")));
        }
        let c = self.h_total - self.gas.q_release * lambda;
        let disc = self.qb * self.qb - 4.0 * self.qa * c;
        if disc < 0.0 {
            return Err(Error::construction(format!(
                "no real state at λ = {lambda} (discriminant {disc:e}); detonation speed below CJ"
            )));
        }
        let big = (-self.qb + disc.sqrt()) / (2.0 * self.qa);
        self.point_at(lambda, c / (self.qa * big))
    }

    /// Conserved quantities (mass flux, momentum, total enthalpy) at a point.
    pub fn conserved(&self, pt: &ProfilePoint) -> [f64; 3] {
        let e = self.gas.c_v() * pt.t;
        [pt.u / pt.v, pt.p + pt.u * pt.u / pt.v, e + pt.p * pt.v + 0.5 * pt.u * pt.u + self.gas.q_release * pt.lambda]
    }

    fn inv_abs_h(&self, tau: f64) -> f64 {
        // Cannot fail for λ ∈ (0, 1]; the state exists by construction.
        let pt = self.state_of_lambda((-tau).exp()).expect("profile state");
        -1.0 / pt.hh
    }

    fn build_x_table(&mut self) -> Result<()> {
        // Cover well past the default truncation point.
        let x_goal = 3.0 * (30.0 / self.mu).max(30.0);
        let mut xs = vec![0.0];
        let mut x = 0.0;
        let mut j = 0usize;
        while x < x_goal {
            let a = j as f64 * TAU_STEP;
            let (dx, _) = quad::integrate(|t| self.inv_abs_h(t), a, a + TAU_STEP, 1e-15, 1e-14);
            x += dx;
            xs.push(x);
            j += 1;
            if j > 1_000_000 {
                return Err(Error::construction("x(λ) table did not reach the target length"));
            }
        }
        self.x_table = xs;
        let tau_end = (self.x_table.len() - 1) as f64 * TAU_STEP;
        let x_end = *self.x_table.last().unwrap();
        let mu = self.mu;
        let (tail, _) = quad::integrate(|t| mu * self.inv_abs_h(t) - 1.0, tau_end, tau_end + 40.0, 1e-16, 1e-12);
        self.big_lambda = (-tau_end + mu * x_end + tail).exp();
        Ok(())
    }

    fn gl_segment(&self, a: f64, b: f64) -> f64 {
        let (xg, wg) = &self.gl;
        let c = 0.5 * (a + b);
        let hl = 0.5 * (b - a);
        xg.iter().zip(wg).map(|(x, w)| w * self.inv_abs_h(c + hl * x)).sum::<f64>() * hl
    }

    fn x_of_tau(&self, tau: f64) -> f64 {
        let last = self.x_table.len() - 1;
        if tau < 0.0 {
            // Analytic continuation to λ > 1.
            return -self.gl_segment(tau, 0.0);
        }
        let j = ((tau / TAU_STEP).floor() as usize).min(last);
        let mut x = self.x_table[j];
        let mut a = j as f64 * TAU_STEP;
        while tau - a > TAU_STEP {
            x += self.gl_segment(a, a + TAU_STEP);
            a += TAU_STEP;
        }
        x + self.gl_segment(a, tau)
    }

    /// x(λ) for λ ∈ (0, λ₀]; λ = 0 maps to the infinity sentinel.
    pub fn x_of_lambda(&self, lambda: f64) -> Result<XCoord> {
        if lambda == 0.0 {
            return Ok(XCoord::Infinity);
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("λ = {lambda} outside (0, 1]")));
        }
        Ok(XCoord::Finite(self.x_of_tau(-lambda.ln())))
    }

    /// τ = −ln λ at position x.
    pub fn tau_of_x(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("x = {x} is not finite")));
        }
        // Initial guess from the table, then Newton with dx/dτ = 1/|H|.
        let mut tau = if x <= 0.0 {
            x / self.inv_abs_h(0.0)
        } else {
            let j = self.x_table.partition_point(|&v| v <= x);
            if j >= self.x_table.len() {
                let xe = *self.x_table.last().unwrap();
                (self.x_table.len() - 1) as f64 * TAU_STEP + (x - xe) * self.mu
            } else {
                let (x0, x1) = (self.x_table[j - 1], self.x_table[j]);
                ((j - 1) as f64 + (x - x0) / (x1 - x0)) * TAU_STEP
            }
        };
        for _ in 0..50 {
            let f = self.x_of_tau(tau) - x;
            let step = f / self.inv_abs_h(tau);
            tau -= step;
            if step.abs() <= 1e-15 * (1.0 + tau.abs()) {
                return Ok(tau);
            }
        }
        Err(Error::numerical(format!("λ(x) inversion did not converge at x = {x}")))
    }

    pub fn lambda_of_x(&self, x: f64) -> Result<f64> {
        Ok((-self.tau_of_x(x)?).exp())
    }

    pub fn state_at_x(&self, x: f64) -> Result<ProfilePoint> {
        self.state_of_lambda(self.lambda_of_x(x)?)
    }

    pub fn decay_rate(&self) -> f64 {
        self.mu
    }

    /// Default truncation point for x-grids.
    pub fn x_max_default(&self) -> f64 {
        (30.0 / self.mu).max(30.0)
    }

    /// Sign of d/dx(c₀² − u²) on a λ-grid of `n` points in (0, 1].
    pub fn type_classify_grid(&self, n: usize) -> TypeReport {
        let vals: Vec<f64> = (1..=n)
            .map(|j| {
                let pt = self.state_of_lambda(j as f64 / n as f64).expect("profile state");
                pt.lam_x * pt.c0sq_eta_l()
            })
            .collect();
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = self.plus.c0sq * self.mu.max(self.plus.hh.abs());
        let tiny = 1e-12 * scale;
        let degenerate = vals.iter().all(|v| v.abs() < tiny);
        let kind = if !degenerate && vals.iter().all(|v| *v < -tiny) {
            ProfileType::TypeD
        } else if !degenerate && vals.iter().all(|v| *v > tiny) {
            ProfileType::TypeI
        } else {
            ProfileType::Mixed
        };
        TypeReport { kind, min, max, degenerate }
    }

    pub fn type_classify(&self) -> TypeReport {
        *self.type_cache.get_or_init(|| self.type_classify_grid(1024))
    }

    /// c₀√η at x = 0+ and at infinity.
    pub fn zeta0_abs(&self) -> f64 {
        self.plus.c0sq_eta().sqrt()
    }
    pub fn zeta_inf_abs(&self) -> f64 {
        self.endstate.c0sq_eta().sqrt()
    }
}

fn zero_point() -> ProfilePoint {
    ProfilePoint {
        lambda: 0.0,
        v: 0.0,
        u: 0.0,
        s: 0.0,
        p: 0.0,
        t: 0.0,
        c0sq: 0.0,
        p_v: 0.0,
        p_s: 0.0,
        v_l: 0.0,
        u_l: 0.0,
        s_l: 0.0,
        p_l: 0.0,
        t_l: 0.0,
        c0sq_l: 0.0,
        p_v_l: 0.0,
        p_s_l: 0.0,
        hh: 0.0,
        lam_x: 0.0,
    }
}

/// The reference type-D configuration (γ = 1.2, q = 1, E = 2.5, k = 5,
/// overdrive 1.2, upstream v = p = 1).
pub fn reference_config() -> (GasModel, ShockSetup) {
    (
        GasModel::new(1.2, 1.0, 2.5, 5.0).expect("valid reference gas"),
        ShockSetup { v_minus: 1.0, p_minus: 1.0, speed: DetSpeed::Overdrive(1.2) },
    )
}

/// The reference profile, built once per process.
pub fn reference_profile() -> &'static ProfileRep {
    static REP: OnceLock<ProfileRep> = OnceLock::new();
    REP.get_or_init(|| {
        let (g, s) = reference_config();
        ProfileRep::build(&g, &s).expect("reference profile")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let rep = reference_profile();
        assert_relative_eq!(rep.d_cj, 1.66068, max_relative = 1e-5);
        assert_relative_eq!(rep.det_speed, 1.81918, max_relative = 1e-5);
        assert_relative_eq!(rep.mu, 0.81205, max_relative = 1e-4);
        assert_relative_eq!(rep.plus.u, 0.76505, max_relative = 1e-4);
        assert_relative_eq!(rep.endstate.u, 0.98231, max_relative = 1e-4);
        assert_relative_eq!(rep.zeta0_abs(), 0.94187, max_relative = 1e-4);
        assert_relative_eq!(rep.zeta_inf_abs(), 0.81824, max_relative = 1e-4);
        assert!((rep.gas.e_act / rep.plus.t - 2.0).abs() < 0.1);
        assert_eq!(rep.type_classify().kind, ProfileType::TypeD);
    }

    #[test]
    fn inert_mach3_shock() {
        let g = GasModel::new(1.4, 0.0, 0.0, 1.0).unwrap();
        let c0 = 1.4f64.sqrt();
        let setup = ShockSetup { v_minus: 1.0, p_minus: 1.0, speed: DetSpeed::Speed(3.0 * c0) };
        let (st, _) = rankine_hugoniot_vn(&g, &setup).unwrap();
        let m2 = 9.0;
        assert_relative_eq!(st.v, (0.4 * m2 + 2.0) / (2.4 * m2), max_relative = 1e-12);
        let rep = ProfileRep::build(&g, &setup).unwrap();
        let r = rep.type_classify();
        assert!(r.degenerate && r.kind == ProfileType::Mixed);
        let cj = cj_speed(&g, 1.0, 1.0).unwrap();
        assert_relative_eq!(cj, c0, max_relative = 1e-12);
    }

    #[test]
    fn strong_shock_limit() {
        let g = GasModel::new(1.4, 0.0, 0.0, 1.0).unwrap();
        let setup = ShockSetup { v_minus: 1.0, p_minus: 1.0, speed: DetSpeed::Speed(1e4) };
        let (st, _) = rankine_hugoniot_vn(&g, &setup).unwrap();
        assert_relative_eq!(st.v, 0.4 / 2.4, max_relative = 1e-6);
    }

    #[test]
    fn jump_conditions_hold() {
        let rep = reference_profile();
        let g = &rep.gas;
        let t_m = rep.p_minus * rep.v_minus;
        let up = [
            rep.u_minus / rep.v_minus,
            rep.p_minus + rep.u_minus * rep.u_minus / rep.v_minus,
            g.c_v() * t_m + rep.p_minus * rep.v_minus + 0.5 * rep.u_minus * rep.u_minus + g.q_release,
        ];
        let down = rep.conserved(&rep.plus);
        for k in 0..3 {
            assert_relative_eq!(up[k], down[k], max_relative = 1e-12);
        }
        assert!(rep.plus.kappa() < 1.0);
    }

    #[test]
    fn cj_state_is_sonic_and_cj_grows_with_q() {
        let mut prev = 0.0;
        for q in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let g = GasModel::new(1.2, q, 2.5, 5.0).unwrap();
            let d = cj_speed(&g, 1.0, 1.0).unwrap();
            assert!(d > prev);
            prev = d;
            let m = d;
            let mom = 1.0 + m * m;
            let a = 2.2 / 0.4 * m * m;
            let b = -6.0 * mom;
            let v = -b / (2.0 * a);
            let p = mom - m * m * v;
            let mach = m * v / (1.2 * p * v).sqrt();
            assert!((mach - 1.0).abs() < 1e-6, "q={q}: Mach {mach}");
        }
    }

    #[test]
    fn below_cj_is_rejected() {
        let (g, _) = reference_config();
        let setup = ShockSetup { v_minus: 1.0, p_minus: 1.0, speed: DetSpeed::Speed(1.5) };
        assert!(matches!(ProfileRep::build(&g, &setup), Err(Error::Construction(_))));
        let setup = ShockSetup { v_minus: 1.0, p_minus: 1.0, speed: DetSpeed::Overdrive(0.9) };
        assert!(matches!(ProfileRep::build(&g, &setup), Err(Error::Config(_))));
    }

    #[test]
    fn boundary_states() {
        let rep = reference_profile();
        assert_eq!(rep.x_of_lambda(0.0).unwrap(), XCoord::Infinity);
        assert_eq!(rep.x_of_lambda(1.0).unwrap(), XCoord::Finite(0.0));
        assert_eq!(rep.lambda_of_x(0.0).unwrap(), 1.0);
        let p1 = rep.state_of_lambda(1.0).unwrap();
        assert_relative_eq!(p1.v, rep.plus.v, max_relative = 1e-14);
        let mid = rep.state_of_lambda(0.5).unwrap();
        assert!(mid.kappa() > rep.plus.kappa() && mid.kappa() < rep.endstate.kappa());
    }

    #[test]
    fn decay_rate_matches_fitted_slope() {
        let rep = reference_profile();
        let (a, b) = (10.0 / rep.mu, 20.0 / rep.mu);
        let slope = (rep.tau_of_x(b).unwrap() - rep.tau_of_x(a).unwrap()) / (b - a);
        assert_relative_eq!(slope, rep.mu, max_relative = 0.01);
        let g = GasModel::new(1.2, 1.0, 0.0, 5.0).unwrap();
        let rep0 = ProfileRep::build(&g, &reference_config().1).unwrap();
        assert_relative_eq!(rep0.mu, 5.0 / rep0.endstate.u, max_relative = 1e-14);
    }

    #[test]
    fn asymptotic_constant_matches_fit() {
        let rep = reference_profile();
        let x = 25.0 / rep.mu;
        let fitted = (-rep.tau_of_x(x).unwrap() + rep.mu * x).exp();
        assert_relative_eq!(fitted, rep.big_lambda, max_relative = 1e-6);
    }

    #[test]
    fn exponential_approach_to_endstate() {
        let rep = reference_profile();
        let e = rep.endstate;
        let ratios: Vec<f64> = (0..16)
            .map(|j| {
                let x = (5.0 + j as f64) / rep.mu;
                let p = rep.state_at_x(x).unwrap();
                let d = ((p.v - e.v).powi(2) + (p.u - e.u).powi(2) + (p.s - e.s).powi(2) + p.lambda.powi(2)).sqrt();
                d * (rep.mu * x).exp()
            })
            .collect();
        let max = ratios.iter().copied().fold(0.0, f64::max);
        assert!(ratios.iter().all(|r| *r <= max) && max < 10.0);
        // Ratio settles monotonically up to roundoff in the difference.
        assert!(ratios.windows(2).all(|w| (w[1] - w[0]) * (ratios[1] - ratios[0]).signum() >= -1e-6 * max));
    }

    #[test]
    fn type_i_when_heat_is_absorbed_in_reverse() {
        // High activation energy with strong overdrive flips the sign somewhere.
        let g = GasModel::new(1.2, 1.0, 2.5, 5.0).unwrap();
        let setup = ShockSetup { v_minus: 1.0, p_minus: 1.0, speed: DetSpeed::Overdrive(2.0) };
        let rep = ProfileRep::build(&g, &setup).unwrap();
        assert_ne!(rep.type_classify().kind, ProfileType::TypeD);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn conserved_along_profile(l in 0.0f64..=1.0) {
            let rep = reference_profile();
            let c = rep.conserved(&rep.state_of_lambda(l).unwrap());
            let c0 = rep.conserved(&rep.plus);
            for k in 0..3 {
                prop_assert!((c[k] - c0[k]).abs() <= 1e-10 * c0[k].abs());
            }
            prop_assert!((rep.state_of_lambda(l).unwrap().u / rep.state_of_lambda(l).unwrap().v - rep.m).abs() <= 1e-14 * rep.m);
        }

        #[test]
        fn lambda_x_round_trip(x in 0.0f64..20.0) {
            let rep = reference_profile();
            let l = rep.lambda_of_x(x).unwrap();
            let back = rep.x_of_lambda(l).unwrap().finite().unwrap();
            prop_assert!((back - x).abs() <= 1e-8 * x.max(1.0));
        }

        #[test]
        fn lambda_derivatives_match_differences(l in 0.05f64..0.95) {
            let rep = reference_profile();
            let p = rep.state_of_lambda(l).unwrap();
            let e = 1e-6;
            let a = rep.state_of_lambda(l + e).unwrap();
            let b = rep.state_of_lambda(l - e).unwrap();
            let fd = |f: fn(&ProfilePoint) -> f64| (f(&a) - f(&b)) / (2.0 * e);
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-6 * x.abs().max(y.abs()).max(1e-6);
            prop_assert!(close(p.v_l, fd(|q| q.v)));
            prop_assert!(close(p.s_l, fd(|q| q.s)));
            prop_assert!(close(p.c0sq_l, fd(|q| q.c0sq)));
            prop_assert!(close(p.p_v_l, fd(|q| q.p_v)));
            prop_assert!(close(p.p_s_l, fd(|q| q.p_s)));
        }
    }
}
