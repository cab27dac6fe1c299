//! High-frequency stability of strong ZND detonations.
//!
//! The crate builds steady detonation profiles for an ideal polytropic gas with
//! one-step Arrhenius kinetics, assembles the linearized 5×5 system
//! `h θ' = (Φ0 + h Φ1) θ`, computes the decaying solution and the stability
//! function `V(ζ,h)`, and provides the block-form, turning-point and
//! special-function machinery used to cross-check those computations.

pub mod blockform;
pub mod cheb;
pub mod cli;
pub mod error;
pub mod evans;
pub mod linsys;
pub mod ode;
pub mod profile;
pub mod quad;
pub mod specfun;
pub mod spline;
pub mod thermo;
pub mod turning;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;

/// Shorthand for a complex number from parts.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Imaginary unit.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };
