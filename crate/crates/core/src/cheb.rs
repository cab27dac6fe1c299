//! Chebyshev interpolants on an interval, with exact derivatives.

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Cheb {
    a: f64,
    b: f64,
    c: Vec<f64>,
}

impl Cheb {
    /// Interpolate `f` at `n` Chebyshev points of the first kind on `[a, b]`.
    pub fn fit<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> Self {
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let t = (PI * (k as f64 + 0.5) / n as f64).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * t)
            })
            .collect();
        let c = (0..n)
            .map(|j| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                s * 2.0 / n as f64 * if j == 0 { 0.5 } else { 1.0 }
            })
            .collect();
        Cheb { a, b, c }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &cj in self.c.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + cj;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.c[0]
    }

    /// Evaluate the interpolating polynomial at a complex point; accurate
    /// inside the Bernstein ellipse where the fitted function is analytic.
    pub fn eval_complex(&self, x: crate::C64) -> crate::C64 {
        let t = (x * 2.0 - self.a - self.b) / (self.b - self.a);
        let zero = crate::C64::new(0.0, 0.0);
        let (mut b1, mut b2) = (zero, zero);
        for &cj in self.c.iter().skip(1).rev() {
            let b0 = t * b1 * 2.0 - b2 + cj;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.c[0]
    }

    /// The derivative as another interpolant.
    pub fn derivative(&self) -> Cheb {
        let n = self.c.len();
        if n < 2 {
            return Cheb { a: self.a, b: self.b, c: vec![0.0] };
        }
        let mut d = vec![0.0; n];
        for j in (0..n - 1).rev() {
            let next = if j + 2 < n { d[j + 2] } else { 0.0 };
            d[j] = next + 2.0 * (j as f64 + 1.0) * self.c[j + 1];
        }
        d[0] *= 0.5;
        let scale = 2.0 / (self.b - self.a);
        for v in d.iter_mut() {
            *v *= scale;
        }
        d.pop();
        Cheb { a: self.a, b: self.b, c: d }
    }

    /// Magnitude of the trailing coefficients relative to the leading one,
    /// a cheap convergence indicator.
    pub fn tail_ratio(&self) -> f64 {
        let n = self.c.len();
        let head = self.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = self.c[n.saturating_sub(3)..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if head == 0.0 {
            0.0
        } else {
            tail / head
        }
    }
}
