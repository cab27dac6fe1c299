//! Complex special functions and the model-problem oracle.

mod airy;
mod bessel;
pub mod dd;
mod gamma;
mod model;
mod picard;

pub use airy::{airy, airy_by, airy_method, airy_rotated, airy_rotated_scaled, airy_scaled, AiryMethod, AiryScaled, AIRY_POLICY};
pub use bessel::{
    bessel_i, bessel_i_by, bessel_i_series_derivative, bessel_k, envelope_ln_v, envelope_ln_x, envelope_weight, BesselMethod,
    BesselScaled, BESSEL_POLICY,
};
pub use gamma::{gamma, ln_gamma, rgamma, sin_pi};
pub use model::{model_ode_check, model_oracle, ModelCheck};
pub use picard::{normal_form_m0_picard, PicardSolution};

use crate::C64;
use serde::{Deserialize, Serialize};

/// Thresholds for switching between convergent and asymptotic expansions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPolicy {
    pub series_radius: f64,
    pub asym_terms: usize,
    pub target_eps: f64,
}

/// A complex value stored as `mant · exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mant: C64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn new(mant: C64, log_scale: f64) -> Self {
        Scaled { mant, log_scale }
    }

    pub fn value(&self) -> C64 {
        self.mant * self.log_scale.exp()
    }

    /// A logarithm of the value (branch of the mantissa's principal log).
    pub fn ln(&self) -> C64 {
        self.mant.ln() + self.log_scale
    }

    pub fn abs_ln(&self) -> f64 {
        self.mant.norm().ln() + self.log_scale
    }

    pub fn mul(&self, other: &Scaled) -> Scaled {
        Scaled { mant: self.mant * other.mant, log_scale: self.log_scale + other.log_scale }
    }

    /// Move all magnitude into the exponent (|mant| = 1 unless zero).
    pub fn normalized(&self) -> Scaled {
        let n = self.mant.norm();
        if n == 0.0 || !n.is_finite() {
            return *self;
        }
        Scaled { mant: self.mant / n, log_scale: self.log_scale + n.ln() }
    }
}
