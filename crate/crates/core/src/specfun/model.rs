//! Model problem `h² w'' = (e^{−2x} + α²) w` and its closed-form solutions
//! `I_β(e^{−x}/h)`, `K_β(e^{−x}/h)` with `β = α/h`.

use super::bessel::{bessel_i, bessel_k};
use crate::ode::{Dopri5, FnSystem, NormRelative, Options};
use crate::{Error, Result, C64};

/// Closed-form solution pair at one point, with x-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelValues {
    pub w_i: C64,
    pub w_i_x: C64,
    pub w_k: C64,
    pub w_k_x: C64,
}

pub fn model_oracle(alpha: C64, h: f64, x: f64) -> Result<ModelValues> {
    let beta = alpha / h;
    if beta.re < 0.0 || beta.norm() > 50.0 {
        return Err(Error::domain(format!("model order β = {beta} outside Re β ≥ 0, |β| ≤ 50")));
    }
    let z = C64::new((-x).exp() / h, 0.0);
    let i = bessel_i(beta, z)?;
    let k = bessel_k(beta, z)?;
    let fi = i.log_scale.exp();
    let fk = k.log_scale.exp();
    // dz/dx = −z.
    Ok(ModelValues { w_i: i.f * fi, w_i_x: -z * i.fp * fi, w_k: k.f * fk, w_k_x: -z * k.fp * fk })
}

/// Closed form against direct integration of the model ODE.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModelCheck {
    /// max relative error of the I-solution on the grid.
    pub max_rel_err_i: f64,
    /// max error of the K-solution relative to its sup norm (K_β may vanish
    /// on the real axis for imaginary β).
    pub max_rel_err_k: f64,
    pub samples: usize,
}

fn integrate_model(alpha: C64, h: f64, x0: f64, w0: C64, wx0: C64, xs: &[f64]) -> Result<Vec<C64>> {
    let a2 = alpha * alpha;
    let sys = FnSystem {
        n: 4,
        f: move |x: f64, y: &[f64], dy: &mut [f64]| {
            let w = C64::new(y[0], y[1]);
            let c = ((-2.0 * x).exp() + a2) * w / (h * h);
            dy[0] = y[2];
            dy[1] = y[3];
            dy[2] = c.re;
            dy[3] = c.im;
        },
    };
    let opts = Options { rtol: 1e-12, atol: 0.0, ..Options::default() };
    let mut ig = Dopri5::new(NormRelative(sys), x0, &[w0.re, w0.im, wx0.re, wx0.im], opts);
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        ig.advance_to(x)?;
        out.push(C64::new(ig.y[0], ig.y[1]));
    }
    Ok(out)
}

/// Compare the closed forms with integration on `[0, x_max]`. The I-solution
/// is integrated from `x_max` toward 0 and the K-solution from 0 toward
/// `x_max`; each direction is the one in which that solution dominates.
pub fn model_ode_check(alpha: C64, h: f64, x_max: f64, samples: usize) -> Result<ModelCheck> {
    let xs: Vec<f64> = (0..samples).map(|j| x_max * j as f64 / (samples - 1) as f64).collect();
    let exact: Vec<ModelValues> = xs.iter().map(|&x| model_oracle(alpha, h, x)).collect::<Result<_>>()?;
    let back: Vec<f64> = xs.iter().rev().copied().collect();
    let last = exact[samples - 1];
    let wi = integrate_model(alpha, h, x_max, last.w_i, last.w_i_x, &back)?;
    let first = exact[0];
    let wk = integrate_model(alpha, h, 0.0, first.w_k, first.w_k_x, &xs)?;
    let mut ei: f64 = 0.0;
    for (j, v) in wi.iter().enumerate() {
        let e = exact[samples - 1 - j].w_i;
        ei = ei.max((v - e).norm() / e.norm());
    }
    let ksup = exact.iter().fold(0.0f64, |m, v| m.max(v.w_k.norm()));
    let mut ek: f64 = 0.0;
    for (v, e) in wk.iter().zip(&exact) {
        ek = ek.max((v - e.w_k).norm() / ksup);
    }
    Ok(ModelCheck { max_rel_err_i: ei, max_rel_err_k: ek, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn bounded_and_decaying_limits() {
        let a = model_oracle(c64(0.0, 0.0), 0.1, 12.0).unwrap();
        assert!((a.w_i - 1.0).norm() < 1e-6);
        let b = model_oracle(c64(0.2, 0.0), 0.1, 20.0).unwrap();
        assert!(b.w_i.norm() < 1e-15);
        let k6 = model_oracle(c64(0.0, 0.0), 0.1, 6.0).unwrap().w_k.re;
        let k12 = model_oracle(c64(0.0, 0.0), 0.1, 12.0).unwrap().w_k.re;
        // K_0(t) ~ −ln t: grows linearly in x.
        assert!((k12 - k6 - 6.0).abs() < 1e-2);
    }

    #[test]
    fn closed_form_matches_integration() {
        let c = model_ode_check(c64(0.0, 0.3), 0.1, 5.0, 101).unwrap();
        assert!(c.max_rel_err_i < 1e-6, "{c:?}");
        assert!(c.max_rel_err_k < 1e-6, "{c:?}");
    }

    #[test]
    fn rejects_left_half_plane_order() {
        assert!(model_oracle(c64(-0.1, 0.0), 0.1, 1.0).is_err());
    }
}
