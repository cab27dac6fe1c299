//! Picard iteration for `W'' = (u² + ψ(ξ)) W` on a real segment, in the
//! normal form `W_j = e^{±uξ} + η_j` with the Volterra kernel
//! `K(ξ,v) = ½(e^{u(ξ−v)} − e^{u(v−ξ)})`.
//!
//! W₁ is anchored at the left end (where e^{uξ} is smallest) and W₂ at the
//! right end. Work is done on `η̂ = η/e^{±uξ}` so nothing overflows.

use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSolution {
    pub xi: Vec<f64>,
    /// W_j(ξ).
    pub w: Vec<C64>,
    /// η_j(ξ).
    pub eta: Vec<C64>,
    /// A-priori bound `(exp(∫|ψ|/|u|) − 1)·|e^{±uξ}|`, integral from the anchor.
    pub bound: Vec<f64>,
    pub iterations: usize,
}

pub fn normal_form_m0_picard(u: C64, xi: &[f64], psi: &[C64], j: u8) -> Result<PicardSolution> {
    if xi.len() < 2 || xi.len() != psi.len() {
        return Err(Error::domain("Picard solver needs matching grids with at least two points"));
    }
    if xi.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("Picard grid must be strictly increasing"));
    }
    if j != 1 && j != 2 {
        return Err(Error::domain(format!("solution index {j} must be 1 or 2")));
    }
    if u.re < 0.0 || u.norm() == 0.0 {
        return Err(Error::domain(format!("segment is not progressive for u = {u}")));
    }
    let n = xi.len();
    // Distance from the anchor, increasing.
    let (s, g_psi): (Vec<f64>, Vec<C64>) = if j == 1 {
        (xi.iter().map(|x| x - xi[0]).collect(), psi.to_vec())
    } else {
        (xi.iter().rev().map(|x| xi[n - 1] - x).collect(), psi.iter().rev().copied().collect())
    };
    let c = 2.0 * u;
    let mut eta_hat = vec![C64::new(0.0, 0.0); n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let g: Vec<C64> = (0..n).map(|k| g_psi[k] * (1.0 + eta_hat[k]) / u).collect();
        let mut next = vec![C64::new(0.0, 0.0); n];
        let mut a = C64::new(0.0, 0.0);
        let mut b = C64::new(0.0, 0.0);
        for k in 0..n - 1 {
            let d = s[k + 1] - s[k];
            a += 0.5 * d * (g[k] + g[k + 1]);
            let cd = c * d;
            let decay = (-cd).exp();
            // ∫₀^d e^{−cτ} dτ and ∫₀^d τ e^{−cτ} dτ, with series for small cd.
            let (e0, e1) = if cd.norm() < 1e-3 {
                (
                    d * (1.0 - cd / 2.0 + cd * cd / 6.0 - cd * cd * cd / 24.0),
                    d * d * (0.5 - cd / 3.0 + cd * cd / 8.0 - cd * cd * cd / 30.0),
                )
            } else {
                ((1.0 - decay) / c, (1.0 - decay * (1.0 + cd)) / (c * c))
            };
            b = decay * b + g[k + 1] * e0 - (g[k + 1] - g[k]) * e1 / d;
            next[k + 1] = 0.5 * (a - b);
        }
        let change = next.iter().zip(&eta_hat).fold(0.0f64, |m, (p, q)| m.max((p - q).norm()));
        let scale = next.iter().fold(1.0f64, |m, p| m.max(p.norm()));
        eta_hat = next;
        if change < 1e-12 * scale {
            break;
        }
        if iterations >= 200 || !change.is_finite() {
            return Err(Error::numerical(format!("Picard iteration diverged (change {change:e})")));
        }
    }
    let mut cum = 0.0;
    let mut bound_hat = vec![0.0; n];
    for k in 1..n {
        cum += 0.5 * (s[k] - s[k - 1]) * (g_psi[k].norm() + g_psi[k - 1].norm()) / u.norm();
        bound_hat[k] = cum.exp_m1();
    }
    if j == 2 {
        eta_hat.reverse();
        bound_hat.reverse();
    }
    let sign = if j == 1 { 1.0 } else { -1.0 };
    let mut w = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    let mut bound = Vec::with_capacity(n);
    for k in 0..n {
        let e = (sign * u * xi[k]).exp();
        w.push(e * (1.0 + eta_hat[k]));
        eta.push(e * eta_hat[k]);
        bound.push(bound_hat[k] * e.norm());
    }
    Ok(PicardSolution { xi: xi.to_vec(), w, eta, bound, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn zero_potential_gives_pure_exponential() {
        let xi: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
        let psi = vec![c64(0.0, 0.0); 11];
        for j in [1, 2] {
            let s = normal_form_m0_picard(c64(3.0, 1.0), &xi, &psi, j).unwrap();
            assert!(s.eta.iter().all(|e| e.norm() == 0.0));
        }
    }

    #[test]
    fn constant_potential_matches_exact_solution() {
        let (u, cst) = (20.0, 1.0);
        let n = 4001;
        let xi: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let psi = vec![c64(cst, 0.0); n];
        let s = normal_form_m0_picard(c64(u, 0.0), &xi, &psi, 1).unwrap();
        let k = (u * u + cst).sqrt();
        for (x, w) in xi.iter().zip(&s.w) {
            let exact = (k * x).cosh() + u / k * (k * x).sinh();
            assert!((w.re - exact).abs() <= 1e-10 * exact, "x={x}: {} vs {exact}", w.re);
        }
        for (e, b) in s.eta.iter().zip(&s.bound) {
            assert!(e.norm() <= *b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn non_progressive_segment_is_rejected() {
        let xi = [0.0, 1.0];
        let psi = [c64(1.0, 0.0); 2];
        assert!(normal_form_m0_picard(c64(-1.0, 0.0), &xi, &psi, 1).is_err());
    }
}
