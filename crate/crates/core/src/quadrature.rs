//! Gauss-Legendre rules used by the quadrature-based cross-checks.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_and_trig() {
        let (x, w) = gauss_legendre(12, 0.0, 2.0);
        let poly: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((poly - 2f64.powi(10) / 10.0).abs() < 1e-11);
        let (x, w) = gauss_legendre(40, 0.0, 1.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (PI * x).sin()).sum();
        assert!((s - 2.0 / PI).abs() < 1e-15);
        let odd = gauss_legendre(7, -1.0, 1.0);
        assert!(odd.0[3].abs() < 1e-15);
        assert!((odd.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
