//! Gauss-Legendre rules for the brute-force oracles.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite rule on `[a, b]` with panels no wider than `max_width`.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    x: Vec<f64>,
    w: Vec<f64>,
    max_width: f64,
}

impl CompositeRule {
    pub fn new(points: usize, max_width: f64) -> Self {
        let (x, w) = gauss_legendre(points);
        Self { x, w, max_width }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let panels = ((b - a).abs() / self.max_width).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            for (x, w) in self.x.iter().zip(&self.w) {
                acc += w * f(mid + 0.5 * h * x);
            }
        }
        0.5 * h * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_integrates_trig() {
        let r = CompositeRule::new(20, PI / 4.0);
        assert!((r.integrate(0.0, PI, f64::sin) - 2.0).abs() < 1e-14);
        assert!((r.integrate(1.0, 1.0 + 2.0 * PI, |s| s.sin().powi(2)) - PI).abs() < 1e-13);
    }
}
