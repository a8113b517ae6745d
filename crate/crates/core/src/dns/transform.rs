//! Modal <-> physical transforms on the doubled vertical period.
//!
//! A cosine or sine series on `[0, 1]` is extended evenly or oddly to a
//! 2-periodic function, so a complex 2D FFT on an `nx x P` grid (with
//! `z_j = 2 j / P`) performs both the horizontal Fourier and the vertical
//! cosine/sine transforms. Two real fields travel through one complex FFT as
//! `f + i g`.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::state::{Parity, C64};
use crate::error::{domain, Result};

/// Grid sizes and FFT plans for a fixed truncation.
pub struct Transform {
    m_max: usize,
    n_max: usize,
    nx: usize,
    nz: usize,
    fft_x: Arc<dyn Fft<f64>>,
    ifft_x: Arc<dyn Fft<f64>>,
    fft_z: Arc<dyn Fft<f64>>,
    ifft_z: Arc<dyn Fft<f64>>,
    buf: Vec<C64>,
    col: Vec<C64>,
    scratch: Vec<C64>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform")
            .field("m_max", &self.m_max)
            .field("n_max", &self.n_max)
            .field("nx", &self.nx)
            .field("nz", &self.nz)
            .finish()
    }
}

/// Smallest `n >= min` with only the prime factors 2, 3 and 5.
pub fn smooth_size(min: usize, even: bool) -> usize {
    let mut n = min.max(1);
    loop {
        if (!even || n.is_multiple_of(2)) && is_smooth(n) {
            return n;
        }
        n += 1;
    }
}

fn is_smooth(mut n: usize) -> bool {
    for p in [2, 3, 5] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

impl Transform {
    /// With `dealias` the grid holds all triple products' quadratic
    /// interactions exactly (`nx >= 3M + 1`, `P >= 3N + 1`); otherwise the
    /// minimal grid `(2M + 1) x (2N + 2)` is used.
    pub fn new(m_max: usize, n_max: usize, dealias: bool) -> Result<Self> {
        if n_max < 1 {
            return Err(domain("n_max", "at least one vertical mode is required"));
        }
        let (nx, nz) = if dealias {
            (smooth_size(3 * m_max + 1, false), smooth_size(3 * n_max + 1, true))
        } else {
            (2 * m_max + 1, 2 * n_max + 2)
        };
        let mut planner = FftPlanner::new();
        let fft_x = planner.plan_fft_forward(nx);
        let ifft_x = planner.plan_fft_inverse(nx);
        let fft_z = planner.plan_fft_forward(nz);
        let ifft_z = planner.plan_fft_inverse(nz);
        let scratch_len = [&fft_x, &ifft_x, &fft_z, &ifft_z]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Ok(Self {
            m_max,
            n_max,
            nx,
            nz,
            fft_x,
            ifft_x,
            fft_z,
            ifft_z,
            buf: vec![C64::new(0.0, 0.0); nx * nz],
            col: vec![C64::new(0.0, 0.0); nx],
            scratch: vec![C64::new(0.0, 0.0); scratch_len],
        })
    }

    /// `(nx, P)`: horizontal points and points on the doubled vertical period.
    pub fn grid(&self) -> (usize, usize) {
        (self.nx, self.nz)
    }

    pub fn len(&self) -> usize {
        self.nx * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn place(&mut self, field: &Array2<C64>, parity: Parity, factor: C64) {
        let m_top = self.m_max as i64;
        let half = 0.5 * factor;
        for m in -m_top..=m_top {
            let i = m.rem_euclid(self.nx as i64) as usize;
            let r = (m + m_top) as usize;
            let base = i * self.nz;
            for n in 0..=self.n_max {
                let c = field[[r, n]];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                match (parity, n) {
                    (Parity::Cos, 0) => self.buf[base] += c * factor,
                    (Parity::Sin, 0) => {}
                    (Parity::Cos, _) => {
                        self.buf[base + n] += c * half;
                        self.buf[base + self.nz - n] += c * half;
                    }
                    (Parity::Sin, _) => {
                        let s = c * half * C64::new(0.0, -1.0);
                        self.buf[base + n] += s;
                        self.buf[base + self.nz - n] -= s;
                    }
                }
            }
        }
    }

    /// Synthesizes one or two modal fields on the physical grid. Outputs are
    /// row-major `nx x P` with the vertical index fastest.
    pub fn synthesize_pair(
        &mut self,
        a: (&Array2<C64>, Parity),
        b: Option<(&Array2<C64>, Parity)>,
        out_a: &mut [f64],
        out_b: Option<&mut [f64]>,
    ) {
        self.buf.fill(C64::new(0.0, 0.0));
        self.place(a.0, a.1, C64::new(1.0, 0.0));
        if let Some((field, parity)) = b {
            self.place(field, parity, C64::new(0.0, 1.0));
        }
        let m_top = self.m_max as i64;
        for m in -m_top..=m_top {
            let i = m.rem_euclid(self.nx as i64) as usize;
            let row = &mut self.buf[i * self.nz..(i + 1) * self.nz];
            self.ifft_z.process_with_scratch(row, &mut self.scratch);
        }
        for j in 0..self.nz {
            self.column_fft(j, false);
        }
        for (o, c) in out_a.iter_mut().zip(&self.buf) {
            *o = c.re;
        }
        if let Some(out_b) = out_b {
            for (o, c) in out_b.iter_mut().zip(&self.buf) {
                *o = c.im;
            }
        }
    }

    fn column_fft(&mut self, j: usize, forward: bool) {
        let nz = self.nz;
        for (i, c) in self.col.iter_mut().enumerate() {
            *c = self.buf[i * nz + j];
        }
        let plan = if forward { &self.fft_x } else { &self.ifft_x };
        plan.process_with_scratch(&mut self.col, &mut self.scratch);
        for (i, c) in self.col.iter().enumerate() {
            self.buf[i * nz + j] = *c;
        }
    }

    /// Projects one or two physical fields back onto the truncated bases.
    pub fn analyze_pair(
        &mut self,
        f: &[f64],
        pf: Parity,
        g: Option<(&[f64], Parity)>,
    ) -> (Array2<C64>, Option<Array2<C64>>) {
        match g {
            Some((g, _)) => {
                for ((b, &x), &y) in self.buf.iter_mut().zip(f).zip(g) {
                    *b = C64::new(x, y);
                }
            }
            None => {
                for (b, &x) in self.buf.iter_mut().zip(f) {
                    *b = C64::new(x, 0.0);
                }
            }
        }
        for i in 0..self.nx {
            let row = &mut self.buf[i * self.nz..(i + 1) * self.nz];
            self.fft_z.process_with_scratch(row, &mut self.scratch);
        }
        let n = self.n_max;
        let cols: Vec<usize> = (0..=n).chain(self.nz - n..self.nz).collect();
        for j in cols {
            self.column_fft(j, true);
        }
        let scale = 1.0 / (self.nx * self.nz) as f64;
        let z = |m: i64, j: i64| -> C64 {
            let i = m.rem_euclid(self.nx as i64) as usize;
            let jj = j.rem_euclid(self.nz as i64) as usize;
            self.buf[i * self.nz + jj] * scale
        };
        let shape = (2 * self.m_max + 1, self.n_max + 1);
        let mut fa = Array2::<C64>::zeros(shape);
        let mut ga = g.map(|_| Array2::<C64>::zeros(shape));
        let m_top = self.m_max as i64;
        let two_i = C64::new(0.0, 2.0);
        for m in -m_top..=m_top {
            let r = (m + m_top) as usize;
            for nn in 0..=(n as i64) {
                let (zp, zm) = (z(m, nn), z(m, -nn));
                let (cp, cm) = (z(-m, -nn).conj(), z(-m, nn).conj());
                let (f_p, f_m, g_p, g_m) = if ga.is_some() {
                    (0.5 * (zp + cp), 0.5 * (zm + cm), (zp - cp) / two_i, (zm - cm) / two_i)
                } else {
                    (zp, zm, C64::new(0.0, 0.0), C64::new(0.0, 0.0))
                };
                fa[[r, nn as usize]] = modal(pf, nn, f_p, f_m);
                if let (Some(ga), Some((_, pg))) = (ga.as_mut(), g) {
                    ga[[r, nn as usize]] = modal(pg, nn, g_p, g_m);
                }
            }
        }
        (fa, ga)
    }

    /// Truncated product of two modal fields, returned on `out` parity
    /// (cos x cos and sin x sin are cosine series; mixed products are sine).
    pub fn product(&mut self, a: (&Array2<C64>, Parity), b: (&Array2<C64>, Parity), out: Parity) -> Array2<C64> {
        let mut fa = vec![0.0; self.len()];
        let mut fb = vec![0.0; self.len()];
        self.synthesize_pair(a, Some(b), &mut fa, Some(&mut fb));
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= y;
        }
        self.analyze_pair(&fa, out, None).0
    }
}

fn modal(parity: Parity, n: i64, plus: C64, minus: C64) -> C64 {
    match (parity, n) {
        (Parity::Cos, 0) => plus,
        (Parity::Sin, 0) => C64::new(0.0, 0.0),
        (Parity::Cos, _) => plus + minus,
        (Parity::Sin, _) => Complex64::new(0.0, 1.0) * (plus - minus),
    }
}
