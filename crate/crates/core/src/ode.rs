//! Adaptive Dormand–Prince 5(4) integrator for real first-order systems.
//!
//! Complex systems are integrated by interleaving real and imaginary parts.
//! The integrator keeps its step size between calls to [`Dopri5::advance_to`],
//! so sampling a solution on a grid costs nothing beyond clamping the last step.

use crate::{Error, Result};

/// A first-order system `y' = f(x, y)`.
pub trait System {
    fn dim(&self) -> usize;
    fn rhs(&mut self, x: f64, y: &[f64], dy: &mut [f64]);

    /// Tolerance scale per component. The default is the usual mixed
    /// absolute/relative scale.
    fn error_weights(&self, y: &[f64], y_new: &[f64], rtol: f64, atol: f64, w: &mut [f64]) {
        for i in 0..w.len() {
            w[i] = atol + rtol * y[i].abs().max(y_new[i].abs());
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { rtol: 1e-10, atol: 1e-14, h0: None, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stateful integrator. `x` and `y` hold the current point.
pub struct Dopri5<S: System> {
    pub sys: S,
    pub x: f64,
    pub y: Vec<f64>,
    pub opts: Options,
    pub stats: Stats,
    h: f64,
    err_old: f64,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    w: Vec<f64>,
    k1_valid: bool,
}

impl<S: System> Dopri5<S> {
    pub fn new(sys: S, x0: f64, y0: &[f64], opts: Options) -> Self {
        let n = sys.dim();
        assert_eq!(n, y0.len(), "state dimension mismatch");
        let z = || vec![0.0; n];
        Dopri5 {
            sys,
            x: x0,
            y: y0.to_vec(),
            opts,
            stats: Stats::default(),
            h: opts.h0.unwrap_or(0.0),
            err_old: 1e-4,
            k: [z(), z(), z(), z(), z(), z(), z()],
            ytmp: z(),
            ynew: z(),
            w: z(),
            k1_valid: false,
        }
    }

    /// Must be called after the caller modifies `y` in place.
    pub fn invalidate(&mut self) {
        self.k1_valid = false;
    }

    fn eval_k1(&mut self) {
        if !self.k1_valid {
            self.sys.rhs(self.x, &self.y, &mut self.k[0]);
            self.stats.rhs_evals += 1;
            self.k1_valid = true;
        }
    }

    fn initial_step(&mut self, dir: f64) -> f64 {
        // Hairer–Wanner starting step heuristic.
        let n = self.y.len();
        let (rtol, atol) = (self.opts.rtol, self.opts.atol);
        self.sys.error_weights(&self.y, &self.y, rtol, atol, &mut self.w);
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..n {
            let sc = self.w[i].max(f64::MIN_POSITIVE);
            d0 += (self.y[i] / sc).powi(2);
            d1 += (self.k[0][i] / sc).powi(2);
        }
        d0 = (d0 / n as f64).sqrt();
        d1 = (d1 / n as f64).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.opts.h_max);
        for i in 0..n {
            self.ytmp[i] = self.y[i] + dir * h0 * self.k[0][i];
        }
        self.sys.rhs(self.x + dir * h0, &self.ytmp, &mut self.k[1]);
        self.stats.rhs_evals += 1;
        let mut d2 = 0.0;
        for i in 0..n {
            let sc = self.w[i].max(f64::MIN_POSITIVE);
            d2 += ((self.k[1][i] - self.k[0][i]) / sc).powi(2);
        }
        d2 = (d2 / n as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    /// Attempt one step of signed size `h`. Returns the scaled error norm;
    /// on success the proposed state is left in `ynew` and `k[6]`.
    fn try_step(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        let x = self.x;
        macro_rules! stage {
            ($dst:expr, $c:expr, $($kk:expr => $a:expr),+) => {{
                for i in 0..n {
                    let mut acc = 0.0;
                    $( acc += $a * self.k[$kk][i]; )+
                    self.ytmp[i] = self.y[i] + h * acc;
                }
                let (head, tail) = self.k.split_at_mut($dst);
                let _ = head;
                self.sys.rhs(x + $c * h, &self.ytmp, &mut tail[0]);
            }};
        }
        stage!(1, C2, 0 => A21);
        stage!(2, C3, 0 => A31, 1 => A32);
        stage!(3, C4, 0 => A41, 1 => A42, 2 => A43);
        stage!(4, C5, 0 => A51, 1 => A52, 2 => A53, 3 => A54);
        stage!(5, 1.0, 0 => A61, 1 => A62, 2 => A63, 3 => A64, 4 => A65);
        for i in 0..n {
            self.ynew[i] = self.y[i]
                + h * (A71 * self.k[0][i]
                    + A73 * self.k[2][i]
                    + A74 * self.k[3][i]
                    + A75 * self.k[4][i]
                    + A76 * self.k[5][i]);
        }
        let (head, tail) = self.k.split_at_mut(6);
        let _ = head;
        self.sys.rhs(x + h, &self.ynew, &mut tail[0]);
        self.stats.rhs_evals += 6;
        self.sys
            .error_weights(&self.y, &self.ynew, self.opts.rtol, self.opts.atol, &mut self.w);
        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * self.k[0][i]
                    + E3 * self.k[2][i]
                    + E4 * self.k[3][i]
                    + E5 * self.k[4][i]
                    + E6 * self.k[5][i]
                    + E7 * self.k[6][i]);
            err += (e / self.w[i]).powi(2);
        }
        (err / n as f64).sqrt()
    }

    /// Take one accepted step toward `x_end` (never past it). Returns true
    /// when `x_end` has been reached.
    pub fn step_toward(&mut self, x_end: f64) -> Result<bool> {
        let span = x_end - self.x;
        if span == 0.0 {
            return Ok(true);
        }
        let dir = span.signum();
        self.eval_k1();
        if self.h == 0.0 {
            self.h = self.initial_step(dir);
        }
        loop {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::numerical(format!(
                    "step budget of {} exhausted at x = {}",
                    self.opts.max_steps, self.x
                )));
            }
            let mut hmag = self.h.abs().min(self.opts.h_max);
            let last = hmag >= span.abs() * (1.0 - 1e-12);
            if last {
                hmag = span.abs();
            }
            if hmag < 1e-14 * (1.0 + self.x.abs()) {
                return Err(Error::numerical(format!("step size underflow at x = {}", self.x)));
            }
            let err = self.try_step(dir * hmag);
            if !err.is_finite() {
                self.stats.rejected += 1;
                self.h = 0.2 * hmag;
                continue;
            }
            if err <= 1.0 {
                let fac11 = err.max(1e-10).powf(0.17);
                let fac = (fac11 / self.err_old.powf(0.04) / 0.9).clamp(0.1, 5.0);
                let hnew = hmag / fac;
                self.err_old = err.max(1e-4);
                self.x = if last { x_end } else { self.x + dir * hmag };
                std::mem::swap(&mut self.y, &mut self.ynew);
                self.k.swap(0, 6);
                self.stats.accepted += 1;
                // Keep the pre-clamp step so grid sampling does not shrink it.
                if !last || hnew > self.h.abs() {
                    self.h = hnew;
                }
                return Ok(last);
            }
            self.stats.rejected += 1;
            let fac = (err.powf(0.17) / 0.9).clamp(1.0, 10.0);
            self.h = hmag / fac;
        }
    }

    /// Integrate to `x_end`, calling `on_step` after every accepted step.
    /// `on_step` may modify the state; it returns true when it did.
    pub fn advance_with<F>(&mut self, x_end: f64, mut on_step: F) -> Result<()>
    where
        F: FnMut(f64, &mut [f64]) -> bool,
    {
        loop {
            let done = self.step_toward(x_end)?;
            if on_step(self.x, &mut self.y) {
                self.k1_valid = false;
            }
            if done {
                return Ok(());
            }
        }
    }

    pub fn advance_to(&mut self, x_end: f64) -> Result<()> {
        self.advance_with(x_end, |_, _| false)
    }
}

/// Sample the solution of `sys` on the monotone grid `xs`, starting from
/// `y0` at `xs[0]`.
pub fn solve_on_grid<S: System>(sys: S, xs: &[f64], y0: &[f64], opts: Options) -> Result<(Vec<Vec<f64>>, Stats)> {
    let mut ig = Dopri5::new(sys, xs[0], y0, opts);
    let mut out = Vec::with_capacity(xs.len());
    out.push(y0.to_vec());
    for &x in &xs[1..] {
        ig.advance_to(x)?;
        out.push(ig.y.clone());
    }
    Ok((out, ig.stats))
}

/// Wrapper measuring local error against the sup norm of the whole state
/// rather than component by component. Suited to linear systems whose
/// components may pass through zero.
pub struct NormRelative<S: System>(pub S);

impl<S: System> System for NormRelative<S> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn rhs(&mut self, x: f64, y: &[f64], dy: &mut [f64]) {
        self.0.rhs(x, y, dy)
    }
    fn error_weights(&self, y: &[f64], y_new: &[f64], rtol: f64, atol: f64, w: &mut [f64]) {
        let m = y.iter().chain(y_new).fold(0.0f64, |m, v| m.max(v.abs()));
        w.iter_mut().for_each(|v| *v = atol + rtol * m);
    }
}

/// Adapter turning a closure into a [`System`].
pub struct FnSystem<F: FnMut(f64, &[f64], &mut [f64])> {
    pub n: usize,
    pub f: F,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> System for FnSystem<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn rhs(&mut self, x: f64, y: &[f64], dy: &mut [f64]) {
        (self.f)(x, y, dy)
    }
}
