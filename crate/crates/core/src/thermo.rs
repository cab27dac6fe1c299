//! Ideal polytropic reacting gas with one-step Arrhenius kinetics.
//!
//! Temperature is gauged by entropy: `T = T_ref (v_ref/v)^{γ−1} exp((S−S_ref)/c_v)`.
//! Heat release enters only through the entropy source `Φ = −r q / T`, so the
//! pressure does not depend on λ.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub gamma: f64,
    pub q_release: f64,
    pub e_act: f64,
    pub k_rate: f64,
    #[serde(default = "one")]
    pub r_gas: f64,
    #[serde(default)]
    pub s_ref: f64,
    #[serde(default = "one")]
    pub t_ref: f64,
    #[serde(default = "one")]
    pub v_ref: f64,
}

fn one() -> f64 {
    1.0
}

impl GasModel {
    pub fn new(gamma: f64, q_release: f64, e_act: f64, k_rate: f64) -> Result<Self> {
        let g = GasModel { gamma, q_release, e_act, k_rate, r_gas: 1.0, s_ref: 0.0, t_ref: 1.0, v_ref: 1.0 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma > 1.0
            && self.k_rate > 0.0
            && self.q_release >= 0.0
            && self.e_act >= 0.0
            && self.r_gas > 0.0
            && self.t_ref > 0.0
            && self.v_ref > 0.0
            && [self.gamma, self.q_release, self.e_act, self.k_rate, self.s_ref].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid gas model {self:?}")))
        }
    }

    pub fn c_v(&self) -> f64 {
        self.r_gas / (self.gamma - 1.0)
    }

    /// Entropy of the state with volume `v` and temperature `t`.
    pub fn entropy_of(&self, v: f64, t: f64) -> f64 {
        self.s_ref + self.c_v() * ((t / self.t_ref).ln() + (self.gamma - 1.0) * (v / self.v_ref).ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoState {
    pub v: f64,
    pub s: f64,
    pub lambda: f64,
}

impl ThermoState {
    pub fn new(v: f64, s: f64, lambda: f64) -> Self {
        ThermoState { v, s, lambda }
    }

    fn check(&self) -> Result<()> {
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(Error::domain(format!("specific volume {} must be positive", self.v)));
        }
        Ok(())
    }
}

/// A value and its partial derivatives in (v, S, λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partials {
    pub value: f64,
    pub d_v: f64,
    pub d_s: f64,
    pub d_lambda: f64,
}

pub fn temperature(g: &GasModel, st: &ThermoState) -> Result<f64> {
    st.check()?;
    Ok(g.t_ref * (g.v_ref / st.v).powf(g.gamma - 1.0) * ((st.s - g.s_ref) / g.c_v()).exp())
}

fn temperature_partials(g: &GasModel, st: &ThermoState) -> Result<Partials> {
    let t = temperature(g, st)?;
    Ok(Partials { value: t, d_v: -(g.gamma - 1.0) * t / st.v, d_s: t / g.c_v(), d_lambda: 0.0 })
}

pub fn pressure(g: &GasModel, st: &ThermoState) -> Result<Partials> {
    let t = temperature(g, st)?;
    let p = g.r_gas * t / st.v;
    Ok(Partials { value: p, d_v: -g.gamma * p / st.v, d_s: p / g.c_v(), d_lambda: 0.0 })
}

/// c₀² = −v² p_v = γ p v.
pub fn sound_speed_sq(g: &GasModel, st: &ThermoState) -> Result<f64> {
    let p = pressure(g, st)?;
    Ok(-st.v * st.v * p.d_v)
}

/// Internal energy e = c_v T.
pub fn internal_energy(g: &GasModel, st: &ThermoState) -> Result<f64> {
    Ok(g.c_v() * temperature(g, st)?)
}

pub fn rate(g: &GasModel, st: &ThermoState) -> Result<Partials> {
    let t = temperature_partials(g, st)?;
    let arr = (-g.e_act / (g.r_gas * t.value)).exp();
    let r = -g.k_rate * st.lambda * arr;
    // ∂r/∂T = r E/(R T²).
    let r_t = r * g.e_act / (g.r_gas * t.value * t.value);
    Ok(Partials { value: r, d_v: r_t * t.d_v, d_s: r_t * t.d_s, d_lambda: -g.k_rate * arr })
}

pub fn entropy_source(g: &GasModel, st: &ThermoState) -> Result<Partials> {
    let t = temperature_partials(g, st)?;
    let r = rate(g, st)?;
    let q = g.q_release;
    let tt = t.value;
    let d = |r_x: f64, t_x: f64| -q * (r_x / tt - r.value * t_x / (tt * tt));
    Ok(Partials { value: -r.value * q / tt, d_v: d(r.d_v, t.d_v), d_s: d(r.d_s, t.d_s), d_lambda: -q * r.d_lambda / tt })
}
