//! 2+3 block diagonalization near x = ∞ and the scalar reduction of the
//! 2×2 block to `h² w'' = (C + h r) w`.
//!
//! `Y = Y₁ Y₂` with `Y₁ = (P₀ Q₀ T₃ T₄ T₅)` and
//! `Y₂ = [[I, hα₁₂], [hα₂₁, I]]`, α₂₁ and α₁₂ solving matrix Riccati
//! equations on the real axis.

use crate::linsys::{basis_dlambda, generator_parts, spectral_point, CMat5, CVec5};
use crate::ode::{solve_on_grid, Dopri5, NormRelative, Options, System};
use crate::profile::{ProfilePoint, ProfileRep, XCoord};
use crate::spline::Spline;
use crate::thermo::GasModel;
use crate::{Error, Result, C64};
use nalgebra::{Matrix2, Matrix3, SMatrix, Vector2};
use serde::{Deserialize, Serialize};

pub type M2 = Matrix2<C64>;
pub type M3 = Matrix3<C64>;
pub type M32 = SMatrix<C64, 3, 2>;
pub type M23 = SMatrix<C64, 2, 3>;

/// Y₁, its x-derivative and the conjugated blocks at one profile point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPoint {
    pub y1: CMat5,
    pub y1_inv: CMat5,
    pub dy1: CMat5,
    pub a0_11: M2,
    /// A°₂₂ = (ζ/u) I₃.
    pub a0_22: C64,
    pub d: CMat5,
}

impl BlockPoint {
    pub fn d11(&self) -> M2 {
        self.d.fixed_view::<2, 2>(0, 0).into_owned()
    }
    pub fn d12(&self) -> M23 {
        self.d.fixed_view::<2, 3>(0, 2).into_owned()
    }
    pub fn d21(&self) -> M32 {
        self.d.fixed_view::<3, 2>(2, 0).into_owned()
    }
    pub fn d22(&self) -> M3 {
        self.d.fixed_view::<3, 3>(2, 2).into_owned()
    }
    pub fn a0_22_mat(&self) -> M3 {
        M3::identity() * self.a0_22
    }
    /// A₁₁ = A°₁₁ + h d₁₁ + h² d₁₂ α₂₁.
    pub fn a11(&self, h: f64, alpha21: &M32) -> M2 {
        self.a0_11 + self.d11() * C64::from(h) + self.d12() * alpha21 * C64::from(h * h)
    }
    /// A₂₂ = A°₂₂ + h d₂₂ + h² d₂₁ α₁₂.
    pub fn a22(&self, h: f64, alpha12: &M23) -> M3 {
        self.a0_22_mat() + self.d22() * C64::from(h) + self.d21() * alpha12 * C64::from(h * h)
    }
    /// hα₂₁' from the Riccati equation.
    pub fn alpha21_rhs(&self, h: f64, a: &M32) -> M32 {
        let hc = C64::from(h);
        self.d21() + self.a0_22_mat() * a - a * self.a0_11
            + (self.d22() * a - a * self.d11()) * hc
            - a * self.d12() * a * C64::from(h * h)
    }
    /// hα₁₂' from the Riccati equation.
    pub fn alpha12_rhs(&self, h: f64, a: &M23) -> M23 {
        let hc = C64::from(h);
        self.d12() + self.a0_11 * a - a * self.a0_22_mat() + (self.d11() * a - a * self.d22()) * hc
            - a * self.d21() * a * C64::from(h * h)
    }
}

pub fn y1_and_d_point(g: &GasModel, pt: &ProfilePoint, zeta: C64) -> Result<BlockPoint> {
    let sd = spectral_point(g, pt, zeta);
    let y1 = CMat5::from_columns(&[sd.p0, sd.q0, sd.t_col(2), sd.t_col(3), sd.t_col(4)]);
    let y1_inv = y1.try_inverse().ok_or_else(|| Error::numerical("Y₁ singular"))?;
    let (dp0, dq0, dt3) = basis_dlambda(g, pt, zeta);
    let lx = C64::from(pt.lam_x);
    let dy1 = CMat5::from_columns(&[dp0 * lx, dq0 * lx, dt3 * lx, CVec5::zeros(), CVec5::zeros()]);
    let phi1 = generator_parts(g, pt).phi1.map(C64::from);
    let d = y1_inv * phi1 * y1 - y1_inv * dy1;
    let (k, eta, u) = (sd.kappa, sd.eta, pt.u);
    let a_ = -k * k * zeta / (eta * u);
    let b_ = C64::from(-k / (eta * u));
    let c_ = -sd.s * sd.s * k / (eta * u);
    Ok(BlockPoint { y1, y1_inv, dy1, a0_11: M2::new(a_, b_, c_, a_), a0_22: zeta / u, d })
}

pub fn y1_and_d(rep: &ProfileRep, x: XCoord, zeta: C64) -> Result<BlockPoint> {
    let pt = match x {
        XCoord::Infinity => rep.endstate,
        XCoord::Finite(x) => rep.state_at_x(x)?,
    };
    y1_and_d_point(&rep.gas, &pt, zeta)
}

/// Solve `P α − α Q = R` for α (3×2) by vectorization. Returns α and the
/// smallest singular value of the 6×6 operator (the separation).
pub fn solve_sylvester(p: &M3, q: &M2, r: &M32) -> Result<(M32, f64)> {
    let mut k = SMatrix::<C64, 6, 6>::zeros();
    for j in 0..2 {
        for i in 0..3 {
            for l in 0..3 {
                k[(i + 3 * j, l + 3 * j)] += p[(i, l)];
            }
            for l in 0..2 {
                k[(i + 3 * j, i + 3 * l)] -= q[(l, j)];
            }
        }
    }
    let sep = k.singular_values().min();
    let rhs = SMatrix::<C64, 6, 1>::from_fn(|idx, _| r[(idx % 3, idx / 3)]);
    let sol = k.lu().solve(&rhs).ok_or_else(|| Error::numerical("singular Sylvester operator"))?;
    Ok((M32::from_fn(|i, j| sol[i + 3 * j]), sep))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SylvesterEnd {
    pub alpha21: [[C64; 2]; 3],
    /// Smallest singular value of the Sylvester operator.
    pub separation: f64,
    pub residual: f64,
}

impl SylvesterEnd {
    pub fn matrix(&self) -> M32 {
        M32::from_fn(|i, j| self.alpha21[i][j])
    }
}

const MIN_SEPARATION: f64 = 1e-6;

/// Stationary α₂₁ at x = ∞, where d₁₂ = 0 makes the Riccati equation linear.
pub fn sylvester_endstate(rep: &ProfileRep, zeta: C64, h: f64) -> Result<SylvesterEnd> {
    let bp = y1_and_d(rep, XCoord::Infinity, zeta)?;
    sylvester_from_point(&bp, h)
}

fn sylvester_from_point(bp: &BlockPoint, h: f64) -> Result<SylvesterEnd> {
    let hc = C64::from(h);
    let p = bp.a0_22_mat() + bp.d22() * hc;
    let q = bp.a0_11 + bp.d11() * hc;
    let (a, sep) = solve_sylvester(&p, &q, &(-bp.d21()))?;
    if sep < MIN_SEPARATION {
        return Err(Error::numerical(format!("block eigenvalue separation {sep:e} below {MIN_SEPARATION:e}")));
    }
    let res = (p * a - a * q + bp.d21()).norm() / (bp.d21().norm() + p.norm() * a.norm()).max(1e-300);
    Ok(SylvesterEnd { alpha21: std::array::from_fn(|i| [a[(i, 0)], a[(i, 1)]]), separation: sep, residual: res })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockOptions {
    /// Left end M; `None` uses 5/μ.
    pub m: Option<f64>,
    /// `None` uses max(30/μ, 30).
    pub x_max: Option<f64>,
    /// Grid nodes on [M, X_max].
    pub n_grid: usize,
    pub rtol: f64,
    /// Drop Φ₁ (d = −Y₁⁻¹Y₁' only); consistency runs.
    pub inert_phi1: bool,
}

impl Default for BlockOptions {
    fn default() -> Self {
        BlockOptions { m: None, x_max: None, n_grid: 1025, rtol: 1e-9, inert_phi1: false }
    }
}

impl BlockOptions {
    fn range(&self, rep: &ProfileRep) -> Result<(f64, f64)> {
        let m = self.m.unwrap_or(5.0 / rep.mu);
        let x_max = self.x_max.unwrap_or_else(|| rep.x_max_default());
        if !(m >= 0.0 && x_max > m) || self.n_grid < 5 {
            return Err(Error::Config(format!("invalid block range [{m}, {x_max}] with {} nodes", self.n_grid)));
        }
        Ok((m, x_max))
    }
}

fn block_point(g: &GasModel, pt: &ProfilePoint, zeta: C64, inert: bool) -> BlockPoint {
    let mut bp = y1_and_d_point(g, pt, zeta).expect("Y₁ is invertible on the profile");
    if inert {
        bp.d = -(bp.y1_inv * bp.dy1);
    }
    bp
}

fn pack<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>, out: &mut [f64]) {
    for (k, v) in m.iter().enumerate() {
        out[2 * k] = v.re;
        out[2 * k + 1] = v.im;
    }
}

fn unpack<const R: usize, const C: usize>(y: &[f64]) -> SMatrix<C64, R, C> {
    SMatrix::<C64, R, C>::from_iterator((0..R * C).map(|k| C64::new(y[2 * k], y[2 * k + 1])))
}

/// Riccati system carrying ln λ in slot 0. `alpha21` selects α₂₁ or α₁₂.
struct RiccatiSystem<'a> {
    rep: &'a ProfileRep,
    zeta: C64,
    h: f64,
    inert: bool,
    alpha21: bool,
}

impl System for RiccatiSystem<'_> {
    fn dim(&self) -> usize {
        13
    }
    fn rhs(&mut self, _x: f64, y: &[f64], dy: &mut [f64]) {
        let pt = self.rep.state_of_lambda(y[0].exp()).expect("profile state");
        let bp = block_point(&self.rep.gas, &pt, self.zeta, self.inert);
        dy[0] = pt.hh;
        let inv_h = C64::from(1.0 / self.h);
        if self.alpha21 {
            pack(&(bp.alpha21_rhs(self.h, &unpack::<3, 2>(&y[1..])) * inv_h), &mut dy[1..]);
        } else {
            pack(&(bp.alpha12_rhs(self.h, &unpack::<2, 3>(&y[1..])) * inv_h), &mut dy[1..]);
        }
    }
}

/// One solution of hθ' = Gθ (or of the adjoint hψᵀ' = −Gᵀψᵀ) with the
/// exponential rate of mode `k` divided out. Slot 10 carries ln λ.
struct ModeSystem<'a> {
    rep: &'a ProfileRep,
    zeta: C64,
    h: f64,
    k: usize,
    adjoint: bool,
    inert: bool,
}

impl ModeSystem<'_> {
    fn generator(&self, pt: &ProfilePoint) -> CMat5 {
        let parts = generator_parts(&self.rep.gas, pt);
        if self.inert {
            parts.phi0(self.zeta)
        } else {
            parts.generator(self.zeta, self.h)
        }
    }
}

impl System for ModeSystem<'_> {
    fn dim(&self) -> usize {
        11
    }
    fn rhs(&mut self, _x: f64, y: &[f64], dy: &mut [f64]) {
        let pt = self.rep.state_of_lambda(y[10].exp()).expect("profile state");
        let g = self.generator(&pt);
        let mu = spectral_point(&self.rep.gas, &pt, self.zeta).mu[self.k];
        let v: CVec5 = unpack(&y[..10]);
        let d = if self.adjoint { -(g.transpose() * v) + v * mu } else { g * v - v * mu };
        pack(&(d / C64::from(self.h)), &mut dy[..10]);
        dy[10] = pt.hh;
    }
}

/// Eigenvector of `a` for the eigenvalue nearest `target`, by shifted
/// inverse iteration.
fn eigvec_near(a: &CMat5, target: C64) -> Result<CVec5> {
    let shift = target + C64::new(1e-9 * a.norm().max(1.0), 0.0);
    let lu = (a - CMat5::identity() * shift).lu();
    let mut v = CVec5::from_fn(|i, _| C64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64));
    for _ in 0..12 {
        let w = lu.solve(&v).ok_or_else(|| Error::numerical("inverse iteration failed"))?;
        v = w / C64::from(w.norm());
    }
    Ok(v)
}

/// Directions of one mode solution at `nodes`, starting from `v0` at `x0`.
/// Nodes must be monotone away from `x0`.
fn mode_track(sys: ModeSystem<'_>, x0: f64, v0: CVec5, nodes: &[f64], rtol: f64) -> Result<Vec<CVec5>> {
    let mut y0 = [0.0; 11];
    pack(&v0, &mut y0[..10]);
    y0[10] = -sys.rep.tau_of_x(x0)?;
    let mut ig = Dopri5::new(NormRelative(sys), x0, &y0, Options { rtol, atol: 1e-14, ..Options::default() });
    let mut out = Vec::with_capacity(nodes.len());
    for &x in nodes {
        if x != ig.x {
            ig.advance_with(x, |_, y| {
                let n = y[..10].iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(1e-3..=1e3).contains(&n) {
                    y[..10].iter_mut().for_each(|v| *v /= n);
                    return true;
                }
                false
            })?;
        }
        out.push(unpack(&ig.y[..10]));
    }
    Ok(out)
}

/// Growth exponents of the off-span contamination for the four mode
/// sweeps: `costs[k][adjoint]` holds the exponents for starting backward
/// at X_max, forward at 0 and forward at M. A contaminating mode λ grows
/// against mode μ at rate Re(λ − μ)/h forward and Re(μ − λ)/h backward;
/// adjoint rates flip sign.
fn sweep_costs(rep: &ProfileRep, zeta: C64, h: f64, m: f64, x_max: f64, inert: bool) -> Result<[[[f64; 3]; 2]; 2]> {
    let n = 400;
    let dx = x_max / n as f64;
    let sys = ModeSystem { rep, zeta, h, k: 0, adjoint: false, inert };
    let mut costs = [[[0.0; 3]; 2]; 2];
    for i in 0..n {
        let x = (i as f64 + 0.5) * dx;
        let pt = rep.state_at_x(x)?;
        let mu = spectral_point(&rep.gas, &pt, zeta).mu;
        let mut ev: Vec<C64> = sys
            .generator(&pt)
            .schur()
            .eigenvalues()
            .map(|e| e.iter().copied().collect())
            .unwrap_or_default();
        if ev.len() != 5 {
            return Err(Error::numerical("generator eigenvalues unavailable"));
        }
        // Remove the two eigenvalues that belong to the tracked span.
        for target in [mu[0], mu[1]] {
            let (j, _) = ev
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
                .unwrap();
            ev.remove(j);
        }
        for k in 0..2 {
            let fwd = ev.iter().map(|l| (l - mu[k]).re).fold(0.0f64, f64::max) * dx / h;
            let bwd = ev.iter().map(|l| (mu[k] - l).re).fold(0.0f64, f64::max) * dx / h;
            for (adj, (f, b)) in [(fwd, bwd), (bwd, fwd)].into_iter().enumerate() {
                if x >= m {
                    costs[k][adj][0] += b;
                    costs[k][adj][2] += f;
                }
                costs[k][adj][1] += f;
            }
        }
    }
    Ok(costs)
}

/// Block decomposition sampled on a uniform grid of [M, X_max].
#[derive(Debug, Clone)]
pub struct BlockDecomp {
    pub zeta: C64,
    pub h: f64,
    pub xs: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub alpha21: Vec<M32>,
    pub alpha12: Vec<M23>,
    pub alpha21_inf: M32,
    pub a11: Vec<M2>,
    pub a22: Vec<M3>,
    pub separation: f64,
    /// ‖α₂₁(X_max) − α₂₁(∞)‖ relative to ‖α₂₁(∞)‖.
    pub endstate_mismatch: f64,
    pub inert_phi1: bool,
}

/// Bounded solutions of both Riccati equations on [M, X_max].
///
/// The linearized α₂₁ equation has modes of both stabilities at ∞, so
/// a plain sweep from the endstate amplifies roundoff by e^{c/h}. Instead
/// each α is read off an invariant subspace spanned by solutions that are
/// dominant in their direction of integration: `[I; hα₂₁]` spans
/// Y₁⁻¹·{θ₁, θ₂} (modes μ₁, μ₂) and `[hα₁₂; I]` is the annihilator of the
/// adjoint solutions ψ₁, ψ₂ (modes −μ₁, −μ₂). Each is swept backward from
/// X_max or forward from x = 0 or M, whichever keeps contamination growth
/// small. Free data at the left end make α non-canonical there, which the
/// conjugation does not care about.
pub fn riccati_solve(rep: &ProfileRep, zeta: C64, h: f64, opts: &BlockOptions) -> Result<BlockDecomp> {
    let (m, x_max) = opts.range(rep)?;
    let n = opts.n_grid;
    let xs: Vec<f64> = (0..n).map(|j| m + (x_max - m) * j as f64 / (n - 1) as f64).collect();
    let bp_inf = block_point(&rep.gas, &rep.endstate, zeta, opts.inert_phi1);
    let end = sylvester_from_point(&bp_inf, h)?;
    let a_inf = end.matrix();

    let sys = |k: usize, adjoint: bool| ModeSystem { rep, zeta, h, k, adjoint, inert: opts.inert_phi1 };
    let back: Vec<f64> = xs.iter().rev().copied().collect();
    let pt_end = rep.state_at_x(x_max)?;
    let pt0 = rep.state_at_x(0.0)?;
    let g_end = sys(0, false).generator(&pt_end);
    let g0 = sys(0, false).generator(&pt0);
    let mu_end = spectral_point(&rep.gas, &pt_end, zeta).mu;
    let mu0 = spectral_point(&rep.gas, &pt0, zeta).mu;

    let rtol = opts.rtol.min(1e-11);
    let costs = sweep_costs(rep, zeta, h, m, x_max, opts.inert_phi1)?;
    let pt_m = rep.state_at_x(m)?;
    let g_m = sys(0, false).generator(&pt_m);
    let mu_m = spectral_point(&rep.gas, &pt_m, zeta).mu;
    let track = |k: usize, adjoint: bool| -> Result<Vec<CVec5>> {
        let c = costs[k][adjoint as usize];
        // θ₁, ψ₂ default to backward and θ₂, ψ₁ to forward from 0; another
        // start is used only when it is clearly cheaper.
        let default = if (k == 1) != adjoint { 1 } else { 0 };
        let best = (0..3).min_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
        let choice = if c[default] <= c[best] + 5.0 { default } else { best };
        let tr = |g: &CMat5| if adjoint { g.transpose() } else { *g };
        match choice {
            0 => {
                let mut v = mode_track(sys(k, adjoint), x_max, eigvec_near(&tr(&g_end), mu_end[k])?, &back, rtol)?;
                v.reverse();
                Ok(v)
            }
            1 => mode_track(sys(k, adjoint), 0.0, eigvec_near(&tr(&g0), mu0[k])?, &xs, rtol),
            _ => mode_track(sys(k, adjoint), m, eigvec_near(&tr(&g_m), mu_m[k])?, &xs, rtol),
        }
    };
    let th1 = track(0, false)?;
    let th2 = track(1, false)?;
    let ps1 = track(0, true)?;
    let ps2 = track(1, true)?;

    let inv_h = C64::from(1.0 / h);
    let bound21 = 10.0 * (1.0 + a_inf.norm());
    let mut lambdas = Vec::with_capacity(n);
    let mut alpha21 = Vec::with_capacity(n);
    let mut alpha12 = Vec::with_capacity(n);
    let mut a11 = Vec::with_capacity(n);
    let mut a22 = Vec::with_capacity(n);
    for j in 0..n {
        let pt = rep.state_at_x(xs[j])?;
        let bp = block_point(&rep.gas, &pt, zeta, opts.inert_phi1);
        let z = bp.y1_inv * SMatrix::<C64, 5, 2>::from_columns(&[th1[j], th2[j]]);
        let top = z.fixed_view::<2, 2>(0, 0).into_owned();
        let top_inv = top.try_inverse().ok_or_else(|| Error::numerical("mode solutions degenerate"))?;
        let a21: M32 = z.fixed_view::<3, 2>(2, 0) * top_inv * inv_h;
        let r = SMatrix::<C64, 2, 5>::from_rows(&[ps1[j].transpose(), ps2[j].transpose()]) * bp.y1;
        let left = r.fixed_view::<2, 2>(0, 0).into_owned();
        let left_inv = left.try_inverse().ok_or_else(|| Error::numerical("adjoint solutions degenerate"))?;
        let a12: M23 = -(left_inv * r.fixed_view::<2, 3>(0, 2)) * inv_h;
        if !(a21.norm() <= bound21) || !(a12.norm() <= bound21) {
            return Err(Error::numerical(format!(
                "Riccati solution left its health bound at x = {:.4} for ζ = {zeta}, h = {h}",
                xs[j]
            )));
        }
        a11.push(bp.a11(h, &a21));
        a22.push(bp.a22(h, &a12));
        lambdas.push(pt.lambda);
        alpha21.push(a21);
        alpha12.push(a12);
    }
    let endstate_mismatch = (alpha21[n - 1] - a_inf).norm() / a_inf.norm().max(1e-300);
    Ok(BlockDecomp {
        zeta,
        h,
        xs,
        lambdas,
        alpha21,
        alpha12,
        alpha21_inf: a_inf,
        a11,
        a22,
        separation: end.separation,
        endstate_mismatch,
        inert_phi1: opts.inert_phi1,
    })
}

impl BlockDecomp {
    pub fn block_point(&self, rep: &ProfileRep, j: usize) -> Result<(ProfilePoint, BlockPoint)> {
        let pt = rep.state_of_lambda(self.lambdas[j])?;
        Ok((pt, block_point(&rep.gas, &pt, self.zeta, self.inert_phi1)))
    }

    /// Y = Y₁Y₂ at node j.
    pub fn y_at(&self, rep: &ProfileRep, j: usize) -> Result<CMat5> {
        let (_, bp) = self.block_point(rep, j)?;
        Ok(bp.y1 * self.y2(j))
    }

    fn y2(&self, j: usize) -> CMat5 {
        let hc = C64::from(self.h);
        let mut y2 = CMat5::identity();
        y2.fixed_view_mut::<2, 3>(0, 2).copy_from(&(self.alpha12[j] * hc));
        y2.fixed_view_mut::<3, 2>(2, 0).copy_from(&(self.alpha21[j] * hc));
        y2
    }

    /// Largest relative mismatch between the sampled α and a direct
    /// integration of the Riccati equations over one grid cell, checked
    /// every `stride` cells.
    pub fn riccati_defect(&self, rep: &ProfileRep, stride: usize) -> Result<f64> {
        let opts = Options { rtol: 1e-11, atol: 1e-14, ..Options::default() };
        let mut worst = 0.0f64;
        for j in (0..self.xs.len() - 1).step_by(stride.max(1)) {
            let (x0, x1) = (self.xs[j], self.xs[j + 1]);
            let mut y0 = [0.0; 13];
            y0[0] = self.lambdas[j].ln();
            pack(&self.alpha21[j], &mut y0[1..]);
            let sys = RiccatiSystem { rep, zeta: self.zeta, h: self.h, inert: self.inert_phi1, alpha21: true };
            let (ys, _) = solve_on_grid(sys, &[x0, x1], &y0, opts)?;
            let a: M32 = unpack(&ys[1][1..]);
            worst = worst.max((a - self.alpha21[j + 1]).norm() / (1.0 + self.alpha21[j + 1].norm()));
            pack(&self.alpha12[j], &mut y0[1..]);
            let sys = RiccatiSystem { rep, zeta: self.zeta, h: self.h, inert: self.inert_phi1, alpha21: false };
            let (ys, _) = solve_on_grid(sys, &[x0, x1], &y0, opts)?;
            let a: M23 = unpack(&ys[1][1..]);
            worst = worst.max((a - self.alpha12[j + 1]).norm() / (1.0 + self.alpha12[j + 1].norm()));
        }
        Ok(worst)
    }

    /// Off-diagonal part of Y⁻¹(GY − hY') relative to the whole, and the
    /// residual ‖hY' − GY + Y·diag(A₁₁, A₂₂)‖/‖Y‖, at node j.
    pub fn conjugation_residual(&self, rep: &ProfileRep, j: usize) -> Result<(f64, f64)> {
        let (pt, bp) = self.block_point(rep, j)?;
        let h = self.h;
        let hc = C64::from(h);
        let y2 = self.y2(j);
        let mut dy2 = CMat5::zeros();
        // hα' comes straight from the Riccati right-hand sides.
        dy2.fixed_view_mut::<2, 3>(0, 2).copy_from(&bp.alpha12_rhs(h, &self.alpha12[j]));
        dy2.fixed_view_mut::<3, 2>(2, 0).copy_from(&bp.alpha21_rhs(h, &self.alpha21[j]));
        let y = bp.y1 * y2;
        // hY' = h Y₁' Y₂ + Y₁ (h Y₂') with hY₂' = h·(hα').
        let hdy = bp.dy1 * y2 * hc + bp.y1 * dy2 * hc;
        let mut g = generator_parts(&rep.gas, &pt).generator(self.zeta, h);
        if self.inert_phi1 {
            g = generator_parts(&rep.gas, &pt).phi0(self.zeta);
        }
        let yinv = y.try_inverse().ok_or_else(|| Error::numerical("Y singular"))?;
        let z = yinv * (g * y - hdy);
        let mut off = z;
        off.fixed_view_mut::<2, 2>(0, 0).fill(C64::from(0.0));
        off.fixed_view_mut::<3, 3>(2, 2).fill(C64::from(0.0));
        let mut blk = CMat5::zeros();
        blk.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.a11[j]);
        blk.fixed_view_mut::<3, 3>(2, 2).copy_from(&self.a22[j]);
        let res = (hdy - g * y + y * blk).norm() / y.norm();
        Ok((off.norm() / z.norm(), res))
    }
}

/// Scalar reduction of the 2×2 block on the decomposition grid.
#[derive(Debug, Clone)]
pub struct ScalarReduction {
    pub xs: Vec<f64>,
    pub c: Vec<C64>,
    pub r: Vec<C64>,
    pub varphi0: Vec<C64>,
    pub h: f64,
    alpha: Spline,
    sqrt_b: Spline,
    b: Spline,
    r_spline: Spline,
    phi0: Spline,
    c_spline: Spline,
    pub a_inf_half_trace: C64,
}

pub fn scalar_reduction(rep: &ProfileRep, dec: &BlockDecomp) -> Result<ScalarReduction> {
    let n = dec.xs.len();
    let x0 = dec.xs[0];
    let dx = dec.xs[1] - dec.xs[0];
    let h = dec.h;
    let mut av = Vec::with_capacity(n);
    let mut bv = Vec::with_capacity(n);
    let mut cv = Vec::with_capacity(n);
    let mut half_tr = Vec::with_capacity(n);
    let mut cc = Vec::with_capacity(n);
    for j in 0..n {
        let m = dec.a11[j];
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        if b.norm() == 0.0 {
            return Err(Error::numerical(format!("b vanishes at x = {}", dec.xs[j])));
        }
        av.push((d - a) / 2.0);
        bv.push(b);
        cv.push(c);
        half_tr.push((a + d) / 2.0);
        let pt = rep.state_of_lambda(dec.lambdas[j])?;
        let sd = spectral_point(&rep.gas, &pt, dec.zeta);
        let b_ = -sd.kappa / (sd.eta * pt.u);
        cc.push((dec.zeta * dec.zeta + pt.c0sq_eta()) * b_ * b_);
    }
    let alpha = Spline::new(x0, dx, av.clone());
    let b_spl = Spline::new(x0, dx, bv.clone());
    let mut r = Vec::with_capacity(n);
    for j in 0..n {
        let (al, b, c) = (av[j], bv[j], cv[j]);
        let (al_x, _) = alpha.node_derivs(j);
        let (b_x, b_xx) = b_spl.node_derivs(j);
        let hr = (b * c + al * al) - cc[j] - h * (al_x - al * b_x / b) - 0.5 * h * h * (b_xx / b - 1.5 * b_x * b_x / (b * b));
        r.push(hr / h);
    }
    // φ₀ = (a+d)/2(∞)·x − ∫_x^{X_max} [(a+d)/2 − (a+d)/2(∞)] ds, the tail
    // beyond X_max being below the profile truncation error.
    let inf = spectral_point(&rep.gas, &rep.endstate, dec.zeta);
    let a_inf = -inf.kappa * inf.kappa * dec.zeta / (inf.eta * rep.endstate.u);
    let dev = Spline::new(x0, dx, half_tr.iter().map(|v| v - a_inf).collect());
    let mut tail = vec![C64::from(0.0); n];
    for j in (0..n - 1).rev() {
        let (f0, f1) = (dev.eval(dec.xs[j]), dev.eval(dec.xs[j + 1]));
        let (d0, _) = dev.node_derivs(j);
        let (d1, _) = dev.node_derivs(j + 1);
        // Trapezoid with end correction, fourth order.
        tail[j] = tail[j + 1] + (f0 + f1) * (dx / 2.0) + (d0 - d1) * (dx * dx / 12.0);
    }
    let varphi0: Vec<C64> = (0..n).map(|j| a_inf * dec.xs[j] - tail[j]).collect();
    // Continuous branch of b^{1/2} starting from the principal value.
    let mut sq = Vec::with_capacity(n);
    let mut prev = bv[0].sqrt();
    for b in &bv {
        let mut s = b.sqrt();
        if (s - prev).norm() > (s + prev).norm() {
            s = -s;
        }
        sq.push(s);
        prev = s;
    }
    Ok(ScalarReduction {
        xs: dec.xs.clone(),
        c: cc.clone(),
        r: r.clone(),
        varphi0: varphi0.clone(),
        h,
        alpha,
        sqrt_b: Spline::new(x0, dx, sq),
        b: b_spl,
        r_spline: Spline::new(x0, dx, r),
        phi0: Spline::new(x0, dx, varphi0),
        c_spline: Spline::new(x0, dx, cc),
        a_inf_half_trace: a_inf,
    })
}

impl ScalarReduction {
    /// K(x) of the map (w, h w_x) ↦ φ₁, without the e^{φ₀/h} factor, and φ₀.
    pub fn k_parts(&self, x: f64) -> (M2, C64) {
        let sb = self.sqrt_b.eval(x);
        let (b, b_x, _) = self.b.eval_all(x);
        let al = self.alpha.eval(x);
        let isb = C64::from(1.0) / sb;
        // (b^{-1/2})' = −½ b^{-3/2} b'.
        let isb_x = -0.5 * isb * b_x / b;
        (M2::new(sb, C64::from(0.0), al * isb - self.h * isb_x, isb), self.phi0.eval(x))
    }

    pub fn k_matrix(&self, x: f64) -> M2 {
        let (k, p) = self.k_parts(x);
        k * (p / self.h).exp()
    }

    /// C + h r at x, with C interpolated.
    pub fn coefficient(&self, x: f64) -> C64 {
        self.c_spline.eval(x) + self.h * self.r_spline.eval(x)
    }

    pub fn r_at(&self, x: f64) -> C64 {
        self.r_spline.eval(x)
    }
}

/// Decaying direction assembled from the block form at x = M: Y(M)(φ₁, 0)
/// with φ₁ the decaying solution of hφ₁' = A₁₁φ₁ integrated jointly with
/// α₂₁ from X_max.
pub fn decaying_block_vector(rep: &ProfileRep, zeta: C64, h: f64, opts: &BlockOptions) -> Result<CVec5> {
    let (m, x_max) = opts.range(rep)?;
    let bp_inf = block_point(&rep.gas, &rep.endstate, zeta, opts.inert_phi1);
    let a_inf = sylvester_from_point(&bp_inf, h)?.matrix();
    let s_inf = spectral_point(&rep.gas, &rep.endstate, zeta).s;
    // A°₁₁(∞)(1, s)ᵀ = μ₁(∞)(1, s)ᵀ since T₁ = P₀ + sQ₀.
    let phi_inf = Vector2::new(C64::from(1.0), s_inf);
    struct Joint<'a> {
        rep: &'a ProfileRep,
        zeta: C64,
        h: f64,
        inert: bool,
    }
    impl System for Joint<'_> {
        fn dim(&self) -> usize {
            17
        }
        fn rhs(&mut self, _x: f64, y: &[f64], dy: &mut [f64]) {
            let pt = self.rep.state_of_lambda(y[0].exp()).expect("profile state");
            let bp = block_point(&self.rep.gas, &pt, self.zeta, self.inert);
            dy[0] = pt.hh;
            let a: M32 = unpack(&y[1..13]);
            let inv_h = C64::from(1.0 / self.h);
            pack(&(bp.alpha21_rhs(self.h, &a) * inv_h), &mut dy[1..13]);
            let mu1 = spectral_point(&self.rep.gas, &pt, self.zeta).mu[0];
            let phi: SMatrix<C64, 2, 1> = unpack(&y[13..17]);
            let d = (bp.a11(self.h, &a) * phi - phi * mu1) * inv_h;
            pack(&d, &mut dy[13..17]);
        }
    }
    let mut y0 = [0.0; 17];
    y0[0] = -rep.tau_of_x(x_max)?;
    pack(&a_inf, &mut y0[1..13]);
    pack(&phi_inf, &mut y0[13..17]);
    let sys = Joint { rep, zeta, h, inert: opts.inert_phi1 };
    let mut ig = Dopri5::new(sys, x_max, &y0, Options { rtol: opts.rtol.min(1e-10), atol: 1e-14, ..Options::default() });
    ig.advance_with(m, |_, y| {
        let n = (y[13] * y[13] + y[14] * y[14] + y[15] * y[15] + y[16] * y[16]).sqrt();
        if !(1e-3..=1e3).contains(&n) {
            for v in y[13..17].iter_mut() {
                *v /= n;
            }
            return true;
        }
        false
    })?;
    let pt = rep.state_of_lambda(ig.y[0].exp())?;
    let bp = block_point(&rep.gas, &pt, zeta, opts.inert_phi1);
    let a21: M32 = unpack(&ig.y[1..13]);
    let phi: SMatrix<C64, 2, 1> = unpack(&ig.y[13..17]);
    // α₁₂(M) = 0, so Y(M) = Y₁ [[I, 0], [hα₂₁, I]].
    let lower = a21 * phi * C64::from(h);
    let v = CVec5::new(phi[0], phi[1], lower[0], lower[1], lower[2]);
    Ok(bp.y1 * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::profile::reference_profile;

    fn zinf() -> C64 {
        c64(0.0, reference_profile().zeta_inf_abs())
    }

    #[test]
    fn block_structure_and_decay() {
        let rep = reference_profile();
        let z = zinf() + c64(0.01, 0.02);
        let m = 5.0 / rep.mu;
        let bm = y1_and_d(rep, XCoord::Finite(m), z).unwrap();
        assert_eq!(bm.a0_22_mat(), M3::identity() * (z / rep.state_at_x(m).unwrap().u));
        let bx = y1_and_d(rep, XCoord::Finite(rep.x_max_default()), z).unwrap();
        assert!(bx.d12().norm() < 1e-8 * bm.d12().norm());
        let bi = y1_and_d(rep, XCoord::Infinity, z).unwrap();
        assert_eq!(bi.d12().norm(), 0.0);
        assert_eq!(bi.d11().norm(), 0.0);
    }

    #[test]
    fn d_blocks_decay_at_rate_mu() {
        let rep = reference_profile();
        let z = zinf() + c64(0.01, 0.02);
        let inf = y1_and_d(rep, XCoord::Infinity, z).unwrap();
        let (x1, x2) = (10.0, 20.0);
        let b1 = y1_and_d(rep, XCoord::Finite(x1), z).unwrap();
        let b2 = y1_and_d(rep, XCoord::Finite(x2), z).unwrap();
        let rate = |f1: f64, f2: f64| (f1 / f2).ln() / (x2 - x1) / rep.mu;
        let r11 = rate((b1.d11() - inf.d11()).norm(), (b2.d11() - inf.d11()).norm());
        let r12 = rate(b1.d12().norm(), b2.d12().norm());
        assert!((r11 - 1.0).abs() < 0.1 && (r12 - 1.0).abs() < 0.1, "{r11} {r12}");
    }

    #[test]
    fn y1_invertible_at_turning_point() {
        let rep = reference_profile();
        let z = c64(0.0, 0.88);
        let xt = crate::linsys::turning_point(rep, z).unwrap().finite().unwrap();
        let bp = y1_and_d(rep, XCoord::Finite(xt), z).unwrap();
        assert!(bp.y1.determinant().norm() > 1e-3);
    }

    #[test]
    fn sylvester_cases() {
        let rep = reference_profile();
        let z = zinf() + c64(0.02, 0.0);
        let e = sylvester_endstate(rep, z, 0.05).unwrap();
        assert!(e.residual < 1e-12);
        let bp = y1_and_d(rep, XCoord::Infinity, z).unwrap();
        let (zero, _) = solve_sylvester(&bp.a0_22_mat(), &bp.a0_11, &M32::zeros()).unwrap();
        assert_eq!(zero.norm(), 0.0);
        // h → 0 limit against a direct solve.
        let (a0, _) = solve_sylvester(&bp.a0_22_mat(), &bp.a0_11, &(-bp.d21())).unwrap();
        let e0 = sylvester_endstate(rep, z, 1e-12).unwrap().matrix();
        assert!((a0 - e0).norm() < 1e-9 * a0.norm().max(1.0));
    }

    #[test]
    fn decomposition_invariants() {
        let rep = reference_profile();
        let z = zinf() + c64(0.02, 0.0);
        let h = 0.05;
        let dec = riccati_solve(rep, z, h, &BlockOptions::default()).unwrap();
        for j in [0, 100, 512, 1024] {
            let (off, res) = dec.conjugation_residual(rep, j).unwrap();
            assert!(off < 1e-8 && res < 1e-8, "j={j}: {off:e} {res:e}");
        }
        let defect = dec.riccati_defect(rep, 16).unwrap();
        assert!(defect < 1e-7, "Riccati defect {defect:e}");
        assert!(dec.endstate_mismatch < 1e-8, "{:e}", dec.endstate_mismatch);
        let sr = scalar_reduction(rep, &dec).unwrap();
        let rmax = sr.r.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        assert!(sr.r.last().unwrap().norm() < 1e-6 * rmax);
        // A₁₁(∞) has eigenvalues μ₁,₂(∞).
        let bi = y1_and_d(rep, XCoord::Infinity, z).unwrap();
        let sd = spectral_point(&rep.gas, &rep.endstate, z);
        let tr = bi.a0_11.trace();
        let det = bi.a0_11.determinant();
        let disc = (tr * tr - 4.0 * det).sqrt();
        let e = [(tr + disc) / 2.0, (tr - disc) / 2.0];
        let close = |m: C64| e.iter().any(|v| (v - m).norm() < 1e-10);
        assert!(close(sd.mu[0]) && close(sd.mu[1]));
        // α₂₁ relaxes to its endstate at rate μ.
        let j1 = 200;
        let j2 = 600;
        let d1 = (dec.alpha21[j1] - dec.alpha21_inf).norm();
        let d2 = (dec.alpha21[j2] - dec.alpha21_inf).norm();
        let rate = (d1 / d2).ln() / (dec.xs[j2] - dec.xs[j1]);
        assert!((rate / rep.mu - 1.0).abs() < 0.1, "rate {rate} vs {}", rep.mu);
    }

    #[test]
    fn inert_override_is_consistent() {
        let rep = reference_profile();
        let z = zinf() + c64(0.02, 0.0);
        let opts = BlockOptions { inert_phi1: true, ..Default::default() };
        let dec = riccati_solve(rep, z, 0.05, &opts).unwrap();
        let (off, _) = dec.conjugation_residual(rep, 300).unwrap();
        assert!(off < 1e-8);
    }

    #[test]
    fn scalar_limit_and_round_trip() {
        let rep = reference_profile();
        let z = zinf() + c64(0.02, 0.01);
        let mut errs = Vec::new();
        let hs = [0.04, 0.02, 0.01];
        for &h in &hs {
            let dec = riccati_solve(rep, z, h, &BlockOptions::default()).unwrap();
            let sr = scalar_reduction(rep, &dec).unwrap();
            let e = sr.r.iter().zip(&sr.c).fold(0.0f64, |m, (r, c)| m.max((h * r).norm() / c.norm().max(1e-3)));
            errs.push(e);
        }
        let order = (errs[0] / errs[2]).ln() / (hs[0] / hs[2]).ln();
        assert!(order >= 0.8, "order {order}: {errs:?}");
    }

    #[test]
    fn k_maps_scalar_solutions_to_block_solutions() {
        let rep = reference_profile();
        let z = zinf() + c64(0.02, 0.01);
        let h = 0.05;
        let dec = riccati_solve(rep, z, h, &BlockOptions::default()).unwrap();
        let sr = scalar_reduction(rep, &dec).unwrap();
        let j = 300;
        let xm = dec.xs[j];
        let opts = Options { rtol: 1e-13, atol: 1e-15, ..Options::default() };
        // (w, h w_x) from an arbitrary start at xm, mapped through K.
        let phi_at = |x: f64| {
            let sys = crate::ode::FnSystem {
                n: 4,
                f: |x: f64, y: &[f64], dy: &mut [f64]| {
                    let w = C64::new(y[0], y[1]);
                    let p = C64::new(y[2], y[3]);
                    let dp = sr.coefficient(x) * w / h;
                    dy[0] = p.re / h;
                    dy[1] = p.im / h;
                    dy[2] = dp.re;
                    dy[3] = dp.im;
                },
            };
            let mut ig = Dopri5::new(sys, xm, &[1.0, 0.0, 0.2, 0.5], opts);
            ig.advance_to(x).unwrap();
            sr.k_matrix(x) * Vector2::new(C64::new(ig.y[0], ig.y[1]), C64::new(ig.y[2], ig.y[3]))
        };
        let diff = |e: f64| (phi_at(xm + e) - phi_at(xm - e)) / C64::from(2.0 * e);
        let e = 2e-3;
        let dphi = (diff(e / 2.0) * C64::from(4.0) - diff(e)) / C64::from(3.0);
        let p0 = phi_at(xm);
        let a11 = dec.a11[j];
        let defect = (dphi * C64::from(h) - a11 * p0).norm() / (a11.norm() * p0.norm());
        assert!(defect < 1e-7, "defect {defect:e}");
    }

    #[test]
    fn decaying_space_factorizes() {
        let rep = reference_profile();
        let z = zinf() + c64(0.02, 0.0);
        let h = 0.05;
        let m = 5.0 / rep.mu;
        let v = decaying_block_vector(rep, z, h, &BlockOptions::default()).unwrap();
        let sol = crate::evans::decaying_solution(rep, z, h, &crate::evans::EvansOptions::default(), &[m]).unwrap();
        let r = crate::evans::type_theta1_residual(&v, &sol.samples[0].1).unwrap();
        assert!(r < 1e-5, "angle {r:e}");
    }
}
