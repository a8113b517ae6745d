//! Sparse modal fields: a handful of Fourier (cosine | sine) terms, used for
//! eigenfunctions, manifold corrections and bifurcated states.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dns::state::{SpectralState, C64};
use crate::error::Result;

/// Values and derivatives of a field at one point. `w = -int_0^z d_x v` is the
/// vertical velocity recovered from incompressibility.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointData {
    pub v: f64,
    pub v_x: f64,
    pub v_z: f64,
    pub v_xx: f64,
    pub v_zz: f64,
    pub w: f64,
    pub th: f64,
    pub th_x: f64,
    pub th_z: f64,
    pub th_xx: f64,
    pub th_zz: f64,
    /// `d_x int_0^z theta`.
    pub dx_int_th: f64,
}

/// `v = sum c e^{i k_m x} cos(n pi z)`, `theta = sum c e^{i k_m x} sin(n pi z)`,
/// with conjugate pairs stored explicitly so the sums are real.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseField {
    pub alpha: f64,
    pub v: BTreeMap<(i64, u32), C64>,
    pub theta: BTreeMap<(i64, u32), C64>,
}

impl SparseField {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            v: BTreeMap::new(),
            theta: BTreeMap::new(),
        }
    }

    pub fn wavenumber(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.alpha
    }

    pub fn add_v(&mut self, m: i64, n: u32, c: C64) {
        *self.v.entry((m, n)).or_insert(C64::new(0.0, 0.0)) += c;
    }

    pub fn add_theta(&mut self, m: i64, n: u32, c: C64) {
        if n > 0 {
            *self.theta.entry((m, n)).or_insert(C64::new(0.0, 0.0)) += c;
        }
    }

    /// Adds `c e^{ikx}` together with its conjugate partner, i.e. the real
    /// field `2 Re(c e^{ikx})` for `m != 0` and `Re(c)` for `m = 0`.
    pub fn add_v_real(&mut self, m: i64, n: u32, c: C64) {
        if m == 0 {
            self.add_v(0, n, C64::new(c.re, 0.0));
        } else {
            self.add_v(m, n, c);
            self.add_v(-m, n, c.conj());
        }
    }

    pub fn add_theta_real(&mut self, m: i64, n: u32, c: C64) {
        if m == 0 {
            self.add_theta(0, n, C64::new(c.re, 0.0));
        } else {
            self.add_theta(m, n, c);
            self.add_theta(-m, n, c.conj());
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        let mut out = self.clone();
        out.v.values_mut().for_each(|c| *c *= f);
        out.theta.values_mut().for_each(|c| *c *= f);
        out
    }

    /// `self + f * other`.
    pub fn axpy(&self, f: f64, other: &SparseField) -> Self {
        let mut out = self.clone();
        for (&(m, n), &c) in &other.v {
            out.add_v(m, n, c * f);
        }
        for (&(m, n), &c) in &other.theta {
            out.add_theta(m, n, c * f);
        }
        out
    }

    /// `(v, theta)` at one point.
    pub fn eval(&self, x: f64, z: f64) -> (f64, f64) {
        let v = self
            .v
            .iter()
            .map(|(&(m, n), c)| (c * C64::from_polar(1.0, self.wavenumber(m) * x)).re * (n as f64 * PI * z).cos())
            .sum();
        let th = self
            .theta
            .iter()
            .map(|(&(m, n), c)| (c * C64::from_polar(1.0, self.wavenumber(m) * x)).re * (n as f64 * PI * z).sin())
            .sum();
        (v, th)
    }

    /// Values and first/second derivatives at one point, from the modal form.
    pub fn eval_full(&self, x: f64, z: f64) -> PointData {
        let mut p = PointData::default();
        for (&(m, n), &c) in &self.v {
            let k = self.wavenumber(m);
            let e = c * C64::from_polar(1.0, k * x);
            let (re, dx) = (e.re, (C64::new(0.0, k) * e).re);
            let q = n as f64 * PI;
            let (cz, sz) = ((q * z).cos(), (q * z).sin());
            p.v += re * cz;
            p.v_x += dx * cz;
            p.v_z -= q * re * sz;
            p.v_xx -= k * k * re * cz;
            p.v_zz -= q * q * re * cz;
            p.w -= if n == 0 { dx * z } else { dx * sz / q };
        }
        for (&(m, n), &c) in &self.theta {
            let k = self.wavenumber(m);
            let e = c * C64::from_polar(1.0, k * x);
            let (re, dx) = (e.re, (C64::new(0.0, k) * e).re);
            let q = n as f64 * PI;
            let (cz, sz) = ((q * z).cos(), (q * z).sin());
            p.th += re * sz;
            p.th_x += dx * sz;
            p.th_z += q * re * cz;
            p.th_xx -= k * k * re * sz;
            p.th_zz -= q * q * re * sz;
            p.dx_int_th += dx * (1.0 - cz) / q;
        }
        p
    }

    /// L² inner product over `(0, alpha) x (0, 1)` by Parseval.
    pub fn inner(&self, other: &SparseField) -> f64 {
        let dot = |a: &BTreeMap<(i64, u32), C64>, b: &BTreeMap<(i64, u32), C64>| -> f64 {
            a.iter()
                .filter_map(|(key, c)| b.get(key).map(|d| (key.1, c * d.conj())))
                .map(|(n, p)| if n == 0 { p.re } else { 0.5 * p.re })
                .sum::<f64>()
        };
        self.alpha * (dot(&self.v, &other.v) + dot(&self.theta, &other.theta))
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Largest `|m|` and `n` present.
    pub fn extent(&self) -> (usize, usize) {
        let keys = self.v.keys().chain(self.theta.keys());
        keys.fold((0, 1), |(mm, nn), &(m, n)| {
            (mm.max(m.unsigned_abs() as usize), nn.max(n as usize))
        })
    }

    /// Places the terms in a dense truncation; terms outside it are an error.
    pub fn to_state(&self, m_max: usize, n_max: usize) -> Result<SpectralState> {
        let mut s = SpectralState::zeros(m_max, n_max, self.alpha)?;
        for (&(m, n), &c) in &self.v {
            s.ensure_mode(m, n as usize)?;
            let i = s.row(m);
            s.v_hat[[i, n as usize]] += c;
        }
        for (&(m, n), &c) in &self.theta {
            s.ensure_mode(m, n as usize)?;
            let i = s.row(m);
            s.theta_hat[[i, n as usize]] += c;
        }
        Ok(s)
    }

    /// Nonzero coefficients of a dense state.
    pub fn from_state(s: &SpectralState) -> Self {
        let mut out = Self::new(s.alpha());
        for (i, m, _) in s.wavenumbers() {
            for n in 0..=s.n_max() {
                let (cv, ct) = (s.v_hat[[i, n]], s.theta_hat[[i, n]]);
                if cv.norm_sqr() > 0.0 {
                    out.add_v(m, n as u32, cv);
                }
                if n > 0 && ct.norm_sqr() > 0.0 {
                    out.add_theta(m, n as u32, ct);
                }
            }
        }
        out
    }
}
