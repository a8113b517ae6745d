//! Truncated Fourier x (cosine | sine) coefficient storage.
//!
//! `v` is expanded on `e^{i k_m x} cos(n pi z)`, `n = 0..=N`, and `theta` on
//! `e^{i k_m x} sin(n pi z)`, `n = 1..=N`, with `k_m = 2 pi m / alpha` and
//! `m = -M..=M`. Both arrays have shape `(2M + 1, N + 1)`; row `m + M` holds
//! wavenumber `m`. Column 0 of `theta_hat` is unused and kept at zero, and
//! column 0 of `v_hat` is zero by the zero-vertical-mean constraint.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub type C64 = Complex64;

/// Vertical basis of a modal field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// `cos(n pi z)`, `n >= 0`.
    Cos,
    /// `sin(n pi z)`, `n >= 1`.
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    m_max: usize,
    n_max: usize,
    alpha: f64,
    pub v_hat: Array2<C64>,
    pub theta_hat: Array2<C64>,
    pub t: f64,
}

impl SpectralState {
    pub fn zeros(m_max: usize, n_max: usize, alpha: f64) -> Result<Self> {
        if n_max < 1 {
            return Err(domain("n_max", "at least one vertical mode is required"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(domain("alpha", format!("must be positive, got {alpha}")));
        }
        let shape = (2 * m_max + 1, n_max + 1);
        Ok(Self {
            m_max,
            n_max,
            alpha,
            v_hat: Array2::zeros(shape),
            theta_hat: Array2::zeros(shape),
            t: 0.0,
        })
    }

    /// Random state with algebraically decaying spectrum, projected onto the
    /// admissible set and rescaled to L² norm `amplitude`.
    pub fn random(m_max: usize, n_max: usize, alpha: f64, amplitude: f64, seed: u64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(domain("amplitude", format!("must be positive, got {amplitude}")));
        }
        let mut s = Self::zeros(m_max, n_max, alpha)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m_top = m_max as i64;
        for m in 0..=m_top {
            for n in 1..=n_max {
                let decay = 1.0 / (1.0 + (m * m) as f64 + (n * n) as f64);
                let mut draw = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
                let (cv, ct) = (draw(), draw());
                let i = s.row(m);
                s.v_hat[[i, n]] = cv;
                s.theta_hat[[i, n]] = ct;
            }
        }
        s.enforce_invariants();
        let norm = s.l2_norm();
        s.scale(amplitude / norm);
        Ok(s)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn row(&self, m: i64) -> usize {
        (m + self.m_max as i64) as usize
    }

    #[inline]
    pub fn wavenumber(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.alpha
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        let m_top = self.m_max as i64;
        (-m_top..=m_top).map(move |m| (self.row(m), m, self.wavenumber(m)))
    }

    pub fn contains_mode(&self, m: i64, n: usize) -> bool {
        m.unsigned_abs() as usize <= self.m_max && n <= self.n_max
    }

    /// Zeroes the vertical-mean row of `v` and the unused row of `theta`,
    /// makes `m = 0` coefficients real and copies `conj(c(m, n))` into
    /// `c(-m, n)`. Idempotent and bit-exact.
    pub fn enforce_invariants(&mut self) {
        enforce_field(&mut self.v_hat, self.m_max);
        enforce_field(&mut self.theta_hat, self.m_max);
        self.v_hat.column_mut(0).fill(C64::new(0.0, 0.0));
        self.theta_hat.column_mut(0).fill(C64::new(0.0, 0.0));
    }

    /// True when every invariant holds exactly.
    pub fn invariants_hold(&self) -> bool {
        let mut copy = self.clone();
        copy.enforce_invariants();
        copy.v_hat == self.v_hat && copy.theta_hat == self.theta_hat
    }

    pub fn scale(&mut self, factor: f64) {
        self.v_hat.mapv_inplace(|c| c * factor);
        self.theta_hat.mapv_inplace(|c| c * factor);
    }

    /// `self += factor * other`; truncations must agree.
    pub fn add_scaled(&mut self, other: &SpectralState, factor: f64) -> Result<()> {
        self.check_same_shape(other)?;
        self.v_hat.scaled_add(C64::new(factor, 0.0), &other.v_hat);
        self.theta_hat.scaled_add(C64::new(factor, 0.0), &other.theta_hat);
        Ok(())
    }

    fn check_same_shape(&self, other: &SpectralState) -> Result<()> {
        if self.m_max != other.m_max || self.n_max != other.n_max || self.alpha != other.alpha {
            return Err(domain("state", "truncation or aspect ratio mismatch"));
        }
        Ok(())
    }

    /// Shifts the physical fields by `x0`: `f(x) -> f(x - x0)`.
    pub fn translate_x(&mut self, x0: f64) {
        let alpha = self.alpha;
        let m_top = self.m_max as i64;
        for m in -m_top..=m_top {
            let phase = C64::from_polar(1.0, -2.0 * PI * m as f64 * x0 / alpha);
            let i = self.row(m);
            self.v_hat.row_mut(i).mapv_inplace(|c| c * phase);
            self.theta_hat.row_mut(i).mapv_inplace(|c| c * phase);
        }
    }

    /// `sum w(k, n pi) |c|^2` integrated over the domain, using Parseval for
    /// the given vertical basis.
    pub fn weighted_sq(&self, field: &Array2<C64>, parity: Parity, w: impl Fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (i, _m, k) in self.wavenumbers() {
            for n in 0..=self.n_max {
                let c = field[[i, n]];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let vert = match (parity, n) {
                    (Parity::Cos, 0) => 1.0,
                    (Parity::Sin, 0) => 0.0,
                    _ => 0.5,
                };
                total += vert * w(k, n as f64 * PI) * c.norm_sqr();
            }
        }
        self.alpha * total
    }

    /// `Re int_D f conj(g)` for two fields on the same basis.
    pub fn inner_field(&self, f: &Array2<C64>, g: &Array2<C64>, parity: Parity) -> f64 {
        let mut total = 0.0;
        for ((i, n), c) in f.indexed_iter() {
            let vert = match (parity, n) {
                (Parity::Cos, 0) => 1.0,
                (Parity::Sin, 0) => 0.0,
                _ => 0.5,
            };
            if vert != 0.0 {
                total += vert * (c * g[[i, n]].conj()).re;
            }
        }
        self.alpha * total
    }

    /// L² inner product of the pairs `(v, theta)`.
    pub fn inner(&self, other: &SpectralState) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.inner_field(&self.v_hat, &other.v_hat, Parity::Cos)
            + self.inner_field(&self.theta_hat, &other.theta_hat, Parity::Sin))
    }

    pub fn l2_v(&self) -> f64 {
        self.weighted_sq(&self.v_hat, Parity::Cos, |_, _| 1.0).sqrt()
    }

    pub fn l2_theta(&self) -> f64 {
        self.weighted_sq(&self.theta_hat, Parity::Sin, |_, _| 1.0).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_v().hypot(self.l2_theta())
    }

    /// `||f||_{H^1}^2 = ||f||^2 + ||grad f||^2`, returned as `(v, theta)` norms.
    pub fn h1_norms(&self) -> (f64, f64) {
        let w = |k: f64, q: f64| 1.0 + k * k + q * q;
        (
            self.weighted_sq(&self.v_hat, Parity::Cos, w).sqrt(),
            self.weighted_sq(&self.theta_hat, Parity::Sin, w).sqrt(),
        )
    }

    /// `||f||_{H^2}^2` including all derivatives up to second order.
    pub fn h2_norms(&self) -> (f64, f64) {
        let w = |k: f64, q: f64| {
            let lap = k * k + q * q;
            1.0 + lap + lap * lap
        };
        (
            self.weighted_sq(&self.v_hat, Parity::Cos, w).sqrt(),
            self.weighted_sq(&self.theta_hat, Parity::Sin, w).sqrt(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.v_hat
            .iter()
            .chain(self.theta_hat.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Copy into a (possibly different) truncation, dropping or zero-padding
    /// modes as needed.
    pub fn resized(&self, m_max: usize, n_max: usize) -> Result<Self> {
        let mut out = Self::zeros(m_max, n_max, self.alpha)?;
        out.t = self.t;
        let m_top = m_max.min(self.m_max) as i64;
        for m in -m_top..=m_top {
            for n in 0..=n_max.min(self.n_max) {
                let (dst, src) = (out.row(m), self.row(m));
                out.v_hat[[dst, n]] = self.v_hat[[src, n]];
                out.theta_hat[[dst, n]] = self.theta_hat[[src, n]];
            }
        }
        Ok(out)
    }

    /// Evaluates `(v, theta)` at one point by direct summation.
    pub fn eval(&self, x: f64, z: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut th = 0.0;
        for (i, _m, k) in self.wavenumbers() {
            let e = C64::from_polar(1.0, k * x);
            for n in 0..=self.n_max {
                let q = n as f64 * PI * z;
                v += (self.v_hat[[i, n]] * e).re * q.cos();
                th += (self.theta_hat[[i, n]] * e).re * q.sin();
            }
        }
        (v, th)
    }

    pub(crate) fn ensure_mode(&self, m: i64, n: usize) -> Result<()> {
        if self.contains_mode(m, n) {
            Ok(())
        } else {
            Err(Error::Truncation(format!(
                "mode (m = {m}, n = {n}) is outside the truncation (M = {}, N = {})",
                self.m_max, self.n_max
            )))
        }
    }
}

fn enforce_field(field: &mut Array2<C64>, m_max: usize) {
    let zero_row = m_max;
    for c in field.row_mut(zero_row).iter_mut() {
        c.im = 0.0;
    }
    for m in 1..=m_max {
        let (pos, neg) = (m_max + m, m_max - m);
        let conj: Vec<C64> = field.row(pos).iter().map(|c| c.conj()).collect();
        for (dst, src) in field.row_mut(neg).iter_mut().zip(conj) {
            *dst = src;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_deterministic_and_admissible() {
        let a = SpectralState::random(6, 5, 3.0, 0.25, 42).unwrap();
        let b = SpectralState::random(6, 5, 3.0, 0.25, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.invariants_hold());
        assert!((a.l2_norm() - 0.25).abs() < 1e-12);
        let c = SpectralState::random(6, 5, 3.0, 0.25, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn enforce_is_idempotent() {
        let mut s = SpectralState::random(4, 4, 2.0, 1.0, 7).unwrap();
        s.v_hat[[3, 2]] += C64::new(0.1, 0.3);
        s.v_hat[[4, 0]] = C64::new(1.0, 1.0);
        s.enforce_invariants();
        let once = s.clone();
        s.enforce_invariants();
        assert_eq!(once, s);
        assert_eq!(s.v_hat[[4, 0]], C64::new(0.0, 0.0));
    }

    #[test]
    fn parseval_matches_pointwise_quadrature() {
        let s = SpectralState::random(3, 4, 2.5, 1.0, 11).unwrap();
        let (nx, nz) = (32, 40);
        let mut sum = 0.0;
        for i in 0..nx {
            for j in 0..=nz {
                let x = s.alpha() * i as f64 / nx as f64;
                let z = j as f64 / nz as f64;
                let (v, th) = s.eval(x, z);
                let w = if j == 0 || j == nz { 0.5 } else { 1.0 };
                sum += w * (v * v + th * th);
            }
        }
        let quad = sum * s.alpha() / nx as f64 / nz as f64;
        assert!((quad - s.l2_norm().powi(2)).abs() < 1e-12, "{quad}");
    }

    #[test]
    fn translation_composes() {
        let s = SpectralState::random(4, 3, 2.0, 1.0, 5).unwrap();
        let mut a = s.clone();
        a.translate_x(0.3);
        a.translate_x(0.4);
        let mut b = s.clone();
        b.translate_x(0.7);
        let (va, _) = a.eval(1.1, 0.3);
        let (vb, _) = b.eval(1.1, 0.3);
        let (vs, _) = s.eval(1.1 - 0.7, 0.3);
        assert!((va - vb).abs() < 1e-12);
        assert!((va - vs).abs() < 1e-12);
    }

    #[test]
    fn outside_truncation_is_reported() {
        let s = SpectralState::zeros(2, 2, 1.0).unwrap();
        assert!(s.ensure_mode(3, 1).is_err());
        assert!(s.ensure_mode(-2, 2).is_ok());
    }
}
