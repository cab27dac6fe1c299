//! Complex cubic spline on a uniform grid with clamped ends; end slopes come
//! from fourth-order one-sided differences.

use crate::C64;

#[derive(Debug, Clone)]
pub struct Spline {
    x0: f64,
    dx: f64,
    y: Vec<C64>,
    /// Second derivatives at the nodes.
    m: Vec<C64>,
}

impl Spline {
    /// Needs at least 5 nodes.
    pub fn new(x0: f64, dx: f64, y: Vec<C64>) -> Self {
        let n = y.len();
        assert!(n >= 5, "spline needs at least 5 nodes");
        let h = dx;
        let s0 = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h);
        let sn = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5]) / (12.0 * h);
        // Tridiagonal system for the second derivatives.
        let mut diag = vec![C64::new(0.0, 0.0); n];
        let mut rhs = vec![C64::new(0.0, 0.0); n];
        let (sub, sup) = (h / 6.0, h / 6.0);
        diag[0] = C64::new(h / 3.0, 0.0);
        rhs[0] = (y[1] - y[0]) / h - s0;
        for i in 1..n - 1 {
            diag[i] = C64::new(2.0 * h / 3.0, 0.0);
            rhs[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
        }
        diag[n - 1] = C64::new(h / 3.0, 0.0);
        rhs[n - 1] = sn - (y[n - 1] - y[n - 2]) / h;
        // Thomas algorithm.
        let mut c = vec![C64::new(0.0, 0.0); n];
        c[0] = C64::new(sup, 0.0) / diag[0];
        rhs[0] /= diag[0];
        for i in 1..n {
            let denom = diag[i] - c[i - 1] * sub;
            if i < n - 1 {
                c[i] = C64::new(sup, 0.0) / denom;
            }
            rhs[i] = (rhs[i] - rhs[i - 1] * sub) / denom;
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= c[i] * next;
        }
        Spline { x0, dx, y, m: rhs }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.y.len();
        let t = ((x - self.x0) / self.dx).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        (i, x - (self.x0 + i as f64 * self.dx))
    }

    /// Value, first and second derivative.
    pub fn eval_all(&self, x: f64) -> (C64, C64, C64) {
        let (i, t) = self.locate(x);
        let h = self.dx;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let a = h - t;
        let v = m0 * (a * a * a) / (6.0 * h) + m1 * (t * t * t) / (6.0 * h) + (y0 / h - m0 * h / 6.0) * a + (y1 / h - m1 * h / 6.0) * t;
        let d1 = -m0 * (a * a) / (2.0 * h) + m1 * (t * t) / (2.0 * h) + (y1 - y0) / h - (m1 - m0) * h / 6.0;
        let d2 = m0 * a / h + m1 * t / h;
        (v, d1, d2)
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.eval_all(x).0
    }

    pub fn nodes(&self) -> usize {
        self.y.len()
    }

    pub fn node_x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// (first, second) derivative at node i.
    pub fn node_derivs(&self, i: usize) -> (C64, C64) {
        let n = self.y.len();
        if i + 1 < n {
            let (_, d1, d2) = self.eval_all(self.node_x(i));
            (d1, d2)
        } else {
            let h = self.dx;
            let d1 = (self.y[n - 1] - self.y[n - 2]) / h + (2.0 * self.m[n - 1] + self.m[n - 2]) * h / 6.0;
            (d1, self.m[n - 1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let f = |x: f64| C64::new((-0.8 * x).exp(), (2.0 * x).sin());
        let df = |x: f64| C64::new(-0.8 * (-0.8 * x).exp(), 2.0 * (2.0 * x).cos());
        let n = 1025;
        let (a, b) = (1.0, 9.0);
        let dx = (b - a) / (n - 1) as f64;
        let s = Spline::new(a, dx, (0..n).map(|i| f(a + i as f64 * dx)).collect());
        for k in 0..97 {
            let x = a + (b - a) * k as f64 / 96.0;
            let (v, d1, _) = s.eval_all(x);
            assert!((v - f(x)).norm() < 5e-9, "x={x}");
            assert!((d1 - df(x)).norm() < 1e-6, "x={x}");
        }
        let (d1, d2) = s.node_derivs(n - 1);
        assert!((d1 - df(b)).norm() < 1e-6);
        assert!((d2 - C64::new(0.64 * (-0.8 * b).exp(), -4.0 * (2.0 * b).sin())).norm() < 1e-4);
    }
}
