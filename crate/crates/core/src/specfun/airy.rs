//! Airy function Ai and its derivative for complex argument.
//!
//! Inside `series_radius` the Maclaurin series is summed in double-double
//! arithmetic, which absorbs the cancellation on the positive real axis.
//! Outside, the exponential expansion is used for `|arg z| <= 2π/3` and the
//! oscillatory form about the negative axis elsewhere.

use super::dd::{CDd, Dd};
use super::{Scaled, SeriesPolicy};
use crate::C64;
use std::f64::consts::PI;

/// Ai(0) and −Ai′(0) to double-double precision.
const AI0: Dd = Dd::new(0.355_028_053_887_817_2, 2.052_336_324_362_12e-17);
const MAIP0: Dd = Dd::new(0.258_819_403_792_806_8, -2.522_243_111_610_832e-17);

pub const AIRY_POLICY: SeriesPolicy = SeriesPolicy { series_radius: 8.0, asym_terms: 60, target_eps: 1e-12 };

/// Ai and Ai′ sharing one real exponent: `Ai = ai·exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryScaled {
    pub ai: C64,
    pub aip: C64,
    pub log_scale: f64,
}

impl AiryScaled {
    pub fn ai_scaled(&self) -> Scaled {
        Scaled { mant: self.ai, log_scale: self.log_scale }
    }
    pub fn aip_scaled(&self) -> Scaled {
        Scaled { mant: self.aip, log_scale: self.log_scale }
    }
    pub fn values(&self) -> (C64, C64) {
        let f = self.log_scale.exp();
        (self.ai * f, self.aip * f)
    }
}

/// Evaluation route, exposed for seam tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AiryMethod {
    Maclaurin,
    Exponential,
    Oscillatory,
}

fn inv_int(n: u64) -> Dd {
    Dd::from_f64(n as f64).recip()
}

fn maclaurin(z: C64) -> AiryScaled {
    let zd = CDd::from_c64(z);
    let z3 = zd * zd * zd;
    let one = CDd::from_c64(C64::new(1.0, 0.0));
    // f = Σ z^{3k} 3^k (1/3)_k / (3k)!, g = Σ z^{3k+1} 3^k (2/3)_k / (3k+1)!
    let (mut tf, mut tg) = (one, zd);
    let (mut sf, mut sg) = (tf, tg);
    // Derivatives: f' terms start at z²/2, g' terms at 1.
    let mut tfp = (zd * zd).mul_f64(0.5);
    let mut tgp = one;
    let (mut sfp, mut sgp) = (tfp, tgp);
    let mut k: u64 = 1;
    loop {
        tf = tf * z3 * CDd::from_dd(inv_int((3 * k - 1) * (3 * k)), Dd::ZERO);
        tg = tg * z3 * CDd::from_dd(inv_int((3 * k + 1) * (3 * k)), Dd::ZERO);
        tgp = tgp * z3 * CDd::from_dd(inv_int((3 * k - 2) * (3 * k)), Dd::ZERO);
        if k >= 2 {
            tfp = tfp * z3 * CDd::from_dd(inv_int((3 * k - 3) * (3 * k - 1)), Dd::ZERO);
            sfp = sfp + tfp;
        }
        sf = sf + tf;
        sg = sg + tg;
        sgp = sgp + tgp;
        let small = |t: CDd, s: CDd| t.norm_approx() <= 1e-33 * s.norm_approx().max(1e-300);
        if k > 3 && small(tf, sf) && small(tg, sg) && small(tfp, sfp) && small(tgp, sgp) {
            break;
        }
        k += 1;
        if k > 400 {
            break;
        }
    }
    let c1 = CDd::from_dd(AI0, Dd::ZERO);
    let c2 = CDd::from_dd(MAIP0, Dd::ZERO);
    let ai = (c1 * sf - c2 * sg).to_c64();
    let aip = (c1 * sfp - c2 * sgp).to_c64();
    AiryScaled { ai, aip, log_scale: 0.0 }
}

fn uv_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; n];
    for k in 1..n {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
    }
    (u, v)
}

/// Sum Σ c_k x^k with smallest-term truncation; `c` already carries signs.
fn asym_sum(c: &[f64], x: C64, eps: f64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    let mut p = C64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for ck in c {
        let t = p * *ck;
        let tn = t.norm();
        if tn > prev {
            break;
        }
        s += t;
        if tn <= eps * s.norm() {
            break;
        }
        prev = tn;
        p *= x;
    }
    s
}

fn exponential(z: C64, pol: &SeriesPolicy) -> AiryScaled {
    let (u, v) = uv_coefficients(pol.asym_terms);
    let chi = z.powf(1.5) * (2.0 / 3.0);
    let inv = 1.0 / chi;
    let su: Vec<f64> = u.iter().enumerate().map(|(k, x)| if k % 2 == 0 { *x } else { -*x }).collect();
    let sv: Vec<f64> = v.iter().enumerate().map(|(k, x)| if k % 2 == 0 { *x } else { -*x }).collect();
    let pu = asym_sum(&su, inv, 1e-17);
    let pv = asym_sum(&sv, inv, 1e-17);
    let z14 = z.powf(0.25);
    let phase = C64::new(0.0, -chi.im).exp();
    let pref = 1.0 / (2.0 * PI.sqrt());
    AiryScaled { ai: phase * pref / z14 * pu, aip: -phase * pref * z14 * pv, log_scale: -chi.re }
}

fn oscillatory(z: C64, pol: &SeriesPolicy) -> AiryScaled {
    let (u, v) = uv_coefficients(pol.asym_terms);
    let w = -z;
    let chi = w.powf(1.5) * (2.0 / 3.0);
    let inv = 1.0 / chi;
    let inv2 = inv * inv;
    let alt = |c: &[f64], odd: bool| -> Vec<f64> {
        c.iter()
            .skip(usize::from(odd))
            .step_by(2)
            .enumerate()
            .map(|(k, x)| if k % 2 == 0 { *x } else { -*x })
            .collect()
    };
    let p = asym_sum(&alt(&u, false), inv2, 1e-17);
    let q = asym_sum(&alt(&u, true), inv2, 1e-17) * inv;
    let r = asym_sum(&alt(&v, false), inv2, 1e-17);
    let s = asym_sum(&alt(&v, true), inv2, 1e-17) * inv;
    let theta = chi - PI / 4.0;
    let scale = theta.im.abs();
    let ep = C64::new(-theta.im - scale, theta.re).exp();
    let em = C64::new(theta.im - scale, -theta.re).exp();
    let cos = (ep + em) * 0.5;
    let sin = (ep - em) / C64::new(0.0, 2.0);
    let w14 = w.powf(0.25);
    let rp = 1.0 / PI.sqrt();
    AiryScaled { ai: rp / w14 * (cos * p + sin * q), aip: rp * w14 * (sin * r - cos * s), log_scale: scale }
}

/// Evaluate by a prescribed route, regardless of |z|.
pub fn airy_by(method: AiryMethod, z: C64) -> AiryScaled {
    match method {
        AiryMethod::Maclaurin => maclaurin(z),
        AiryMethod::Exponential => exponential(z, &AIRY_POLICY),
        AiryMethod::Oscillatory => oscillatory(z, &AIRY_POLICY),
    }
}

pub fn airy_method(z: C64, pol: &SeriesPolicy) -> AiryMethod {
    if z.norm() < pol.series_radius {
        AiryMethod::Maclaurin
    } else if z.arg().abs() <= 2.0 * PI / 3.0 {
        AiryMethod::Exponential
    } else {
        AiryMethod::Oscillatory
    }
}

/// Ai(z), Ai′(z) in scaled form; never overflows.
pub fn airy_scaled(z: C64) -> AiryScaled {
    airy_by(airy_method(z, &AIRY_POLICY), z)
}

/// Ai(z), Ai′(z). Overflows to infinity only far beyond |z| = 100.
pub fn airy(z: C64) -> (C64, C64) {
    airy_scaled(z).values()
}

/// `Ai_j(z) = Ai(z e^{−2πij/3})` for j ∈ {−1, 0, 1}, with its z-derivative.
pub fn airy_rotated_scaled(j: i32, z: C64) -> AiryScaled {
    assert!((-1..=1).contains(&j), "rotation index must be -1, 0 or 1");
    let rot = C64::from_polar(1.0, -2.0 * PI * j as f64 / 3.0);
    let a = airy_scaled(z * rot);
    AiryScaled { ai: a.ai, aip: a.aip * rot, log_scale: a.log_scale }
}

pub fn airy_rotated(j: i32, z: C64) -> C64 {
    airy_rotated_scaled(j, z).ai_scaled().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::specfun::gamma;

    const ORACLE: [(f64, f64, f64, f64, f64, f64); 12] = [
        (0.5, 0.3, 0.22634795458107734, -0.06800141109668117, -0.23013706202248152, 0.03652315800475668),
        (3.0, -2.0, -0.00967720105861024, -0.005524689111732706, 0.020990085245160245, 0.005347465695574646),
        (-6.0, 1.0, -1.8665305812449398, 0.9559654835184781, 2.6829944789224482, 4.355480324086082),
        (7.9, 0.1, 5.99464599307336e-08, -1.7507669999827898e-08, -1.706460463827831e-07, 4.870511172602697e-08),
        (8.1, 0.2, 2.9657340119984194e-08, -1.9229360424212846e-08, -8.596606117708382e-08, 5.428915249279106e-08),
        (-12.0, 3.0, 1795.8331665609355, 4711.404680557493, 15687.739254922095, -8191.710662476748),
        (15.0, 15.0, -1.5242800743788565e-12, 1.2389854126760858e-12, 8.672380567053099e-12, -2.608439737350857e-12),
        (-30.0, -0.5, -0.6703849353098498, -1.733199251101227, 9.59799166923708, -3.576661926492042),
        (2.0, 7.0, 19.10440980870774, 0.5641545108202611, -40.455959268872675, -31.631376412290454),
        (40.0, 0.0, 6.365742658552915e-75, 0.0, -4.030017977600678e-74, 0.0),
        (6.5, -4.0, -6.12822377460602e-06, -1.0898682752484823e-05, 2.448243531552107e-05, 2.4761554328239674e-05),
        (-5.0, -5.0, -9034.906596717632, 16279.459048837543, -30622.676872538847, -38106.25410599294),
    ];

    #[test]
    fn matches_high_precision_values() {
        for &(x, y, ar, ai, br, bi) in &ORACLE {
            let (a, b) = airy(c64(x, y));
            let (ea, eb) = (c64(ar, ai), c64(br, bi));
            assert!((a - ea).norm() <= 1e-10 * ea.norm(), "Ai({x}+{y}i) = {a}, want {ea}");
            assert!((b - eb).norm() <= 1e-10 * eb.norm(), "Ai'({x}+{y}i) = {b}, want {eb}");
        }
    }

    #[test]
    fn values_at_origin_from_gamma() {
        let (a, b) = airy(c64(0.0, 0.0));
        let g23 = gamma(c64(2.0 / 3.0, 0.0)).unwrap();
        let g13 = gamma(c64(1.0 / 3.0, 0.0)).unwrap();
        assert!((a - 3f64.powf(-2.0 / 3.0) / g23).norm() < 1e-15);
        assert!((b + 3f64.powf(-1.0 / 3.0) / g13).norm() < 1e-15);
    }

    #[test]
    fn leading_exponential_behaviour() {
        for x in [20.0, 35.0, 50.0] {
            let z = c64(x, 0.0);
            let a = airy_scaled(z);
            let chi = 2.0 / 3.0 * x.powf(1.5);
            let r = a.ai * (a.log_scale + chi).exp() * 2.0 * PI.sqrt() * x.powf(0.25);
            assert!((r - 1.0).norm() < 0.01 / chi * 10.0, "x={x}: {r}");
        }
    }
}
