//! Quadrature cross-checks for the manifold coefficients and the cubic
//! coefficient. Nothing here uses the closed forms: nonlinear products are
//! evaluated pointwise, projected by Gauss-Legendre (vertical) and periodic
//! trapezoid (horizontal) quadrature, and the quadratic manifold is solved mode
//! by mode from the projected forcing.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{ManifoldCoeffs, ReducedModel};
use crate::dns::state::C64;
use crate::error::{Error, Result};
use crate::field::{PointData, SparseField};
use crate::params::DimensionlessParams;
use crate::quadrature::gauss_legendre;
use crate::spectrum::{mode_matrix, ModeIndex};

const Z_NODES: usize = 48;
const N_PROJECT: u32 = 6;

/// Outcome of the quadrature oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldOracle {
    pub g11: SparseField,
    pub g12: SparseField,
    pub g22: SparseField,
    /// Cubic coefficient from `<N(s psi_1 + s^2 g11), psi_1>` by polynomial fit.
    pub l: f64,
    /// Same along `psi_2` with `g22`.
    pub l_psi2: f64,
    /// Largest misfit of the polynomial fit.
    pub fit_residual: f64,
    /// L² norm of the forcing not captured by the projected modes.
    pub projection_leftover: f64,
}

struct Grid {
    xs: Vec<f64>,
    zs: Vec<f64>,
    w: Vec<f64>,
    wz: Vec<f64>,
    alpha: f64,
}

impl Grid {
    fn new(alpha: f64, m_c: i64) -> Self {
        let nx = (16 * m_c.unsigned_abs() as usize + 16).max(32);
        let xs: Vec<f64> = (0..nx).map(|i| alpha * i as f64 / nx as f64).collect();
        let (zs, wz) = gauss_legendre(Z_NODES, 0.0, 1.0);
        let wx = alpha / nx as f64;
        let w = xs.iter().flat_map(|_| wz.iter().map(move |q| q * wx)).collect();
        Self { xs, zs, w, wz, alpha }
    }

    fn sample(&self, f: &SparseField) -> Vec<PointData> {
        self.xs
            .iter()
            .flat_map(|&x| self.zs.iter().map(move |&z| f.eval_full(x, z)))
            .collect()
    }

    fn dot(&self, a: &Pair, b: &Pair) -> f64 {
        (0..self.w.len())
            .map(|i| self.w[i] * (a.v[i] * b.v[i] + a.t[i] * b.t[i]))
            .sum()
    }

    fn remove_vertical_mean(&self, f: &mut [f64]) {
        let nz = self.zs.len();
        for row in f.chunks_mut(nz) {
            let mean: f64 = row.iter().zip(&self.wz).map(|(v, w)| v * w).sum();
            row.iter_mut().for_each(|v| *v -= mean);
        }
    }

    /// `(2 / alpha) int f e^{-ikx} basis_n(z)`.
    fn coefficient(&self, f: &[f64], m: i64, n: u32, cosine: bool) -> C64 {
        let k = 2.0 * PI * m as f64 / self.alpha;
        let nz = self.zs.len();
        let mut acc = C64::new(0.0, 0.0);
        for (i, &x) in self.xs.iter().enumerate() {
            let e = C64::from_polar(1.0, -k * x);
            for (j, &z) in self.zs.iter().enumerate() {
                let b = if cosine {
                    (n as f64 * PI * z).cos()
                } else {
                    (n as f64 * PI * z).sin()
                };
                acc += e * (self.w[i * nz + j] * f[i * nz + j] * b);
            }
        }
        acc * (2.0 / self.alpha)
    }
}

struct Pair {
    v: Vec<f64>,
    t: Vec<f64>,
}

impl Pair {
    fn of(points: &[PointData]) -> Self {
        Self {
            v: points.iter().map(|p| p.v).collect(),
            t: points.iter().map(|p| p.th).collect(),
        }
    }
}

/// `N(a, b) = -((a.v d_x + a.w d_z) b.v, (a.v d_x + a.w d_z) b.theta)`.
fn nonlinear(a: &[PointData], b: &[PointData]) -> Pair {
    Pair {
        v: a.iter().zip(b).map(|(p, q)| -(p.v * q.v_x + p.w * q.v_z)).collect(),
        t: a.iter().zip(b).map(|(p, q)| -(p.v * q.th_x + p.w * q.th_z)).collect(),
    }
}

fn add(a: &Pair, b: &Pair) -> Pair {
    Pair {
        v: a.v.iter().zip(&b.v).map(|(x, y)| x + y).collect(),
        t: a.t.iter().zip(&b.t).map(|(x, y)| x + y).collect(),
    }
}

fn critical_params(model: &ReducedModel, d: &DimensionlessParams) -> DimensionlessParams {
    d.with_rayleigh(model.rayleigh).with_sign(1)
}

/// Projects `P` (vertical mean removal on the velocity) and `P_s` (removal of
/// the critical eigendirections) pointwise.
fn project_stable(grid: &Grid, mut f: Pair, psi: &[Pair; 2]) -> Pair {
    grid.remove_vertical_mean(&mut f.v);
    for p in psi {
        let c = grid.dot(&f, p);
        f.v.iter_mut().zip(&p.v).for_each(|(a, b)| *a -= c * b);
        f.t.iter_mut().zip(&p.t).for_each(|(a, b)| *a -= c * b);
    }
    f
}

/// Solves `(L - 2 beta) g = -forcing` mode by mode on the projected forcing.
fn solve_quadratic(
    grid: &Grid,
    forcing: &Pair,
    model: &ReducedModel,
    d: &DimensionlessParams,
    scale: f64,
) -> Result<(SparseField, f64)> {
    let dc = critical_params(model, d);
    let m_top = 4 * model.m_c.abs();
    let mut g = SparseField::new(grid.alpha);
    let mut captured = SparseField::new(grid.alpha);
    for m in -m_top..=m_top {
        for n in 1..=N_PROJECT {
            let rv = grid.coefficient(&forcing.v, m, n, true);
            let rt = grid.coefficient(&forcing.t, m, n, false);
            if rv.norm() + rt.norm() < 1e-13 * scale {
                continue;
            }
            captured.add_v(m, n, rv);
            captured.add_theta(m, n, rt);
            let l = mode_matrix(ModeIndex { m, n }, &dc);
            let two_beta = C64::new(2.0 * model.beta, 0.0);
            let (a, b, c, e) = (l[0][0] - two_beta, l[0][1], l[1][0], l[1][1] - two_beta);
            let det = a * e - b * c;
            if det.norm() < 1e-14 * (a.norm() * e.norm()).max(1.0) {
                return Err(Error::Internal(format!("singular resolvent at mode ({m}, {n})")));
            }
            let gv = (-rv * e + b * rt) / det;
            let gt = (c * rv - a * rt) / det;
            g.add_v(m, n, gv);
            g.add_theta(m, n, gt);
        }
    }
    let cap = Pair::of(&grid.sample(&captured));
    let leftover = Pair {
        v: forcing.v.iter().zip(&cap.v).map(|(a, b)| a - b).collect(),
        t: forcing.t.iter().zip(&cap.t).map(|(a, b)| a - b).collect(),
    };
    let leftover_norm = grid.dot(&leftover, &leftover).sqrt();
    Ok((prune(g), leftover_norm))
}

fn prune(mut f: SparseField) -> SparseField {
    let peak =
        f.v.values()
            .chain(f.theta.values())
            .fold(0.0f64, |a, c| a.max(c.norm()));
    let tol = 1e-12 * peak.max(f64::MIN_POSITIVE);
    f.v.retain(|_, c| c.norm() > tol);
    f.theta.retain(|_, c| c.norm() > tol);
    f
}

/// Least-squares fit of `f(s) = c2 s^2 + c3 s^3 + c4 s^4`; returns `(c3, misfit)`.
fn cubic_coefficient(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    let a = DMatrix::from_fn(samples.len(), 3, |i, j| samples[i].0.powi(j as i32 + 2));
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(format!("least squares failed: {e}")))?;
    let misfit = (a * &c - b).amax();
    Ok((c[1], misfit))
}

/// Runs the oracle at the model's Rayleigh number.
pub fn manifold_oracle(model: &ReducedModel, d: &DimensionlessParams) -> Result<ManifoldOracle> {
    let grid = Grid::new(model.alpha, model.m_c);
    let eig = &model.eigenvector;
    let (f1, f2) = (eig.profile(1), eig.profile(2));
    let (p1, p2) = (grid.sample(&f1), grid.sample(&f2));
    let psi = [Pair::of(&p1), Pair::of(&p2)];

    let n11 = project_stable(&grid, nonlinear(&p1, &p1), &psi);
    let n22 = project_stable(&grid, nonlinear(&p2, &p2), &psi);
    let n12 = project_stable(&grid, add(&nonlinear(&p1, &p2), &nonlinear(&p2, &p1)), &psi);
    let scale = grid.dot(&n11, &n11).sqrt().max(grid.dot(&n22, &n22).sqrt());
    let (g11, left11) = solve_quadratic(&grid, &n11, model, d, scale)?;
    let (g22, left22) = solve_quadratic(&grid, &n22, model, d, scale)?;
    let (g12, left12) = solve_quadratic(&grid, &n12, model, d, scale)?;

    let fit = |f: &SparseField, g: &SparseField, target: &Pair| -> Result<(f64, f64)> {
        let samples: Vec<(f64, f64)> = [-1.0, -0.8, -0.6, -0.4, -0.2, 0.2, 0.4, 0.6, 0.8, 1.0]
            .iter()
            .map(|&s| {
                let field = f.scaled(s).axpy(s * s, g);
                let pts = grid.sample(&field);
                (s, grid.dot(&nonlinear(&pts, &pts), target))
            })
            .collect();
        cubic_coefficient(&samples)
    };
    let (l, r1) = fit(&f1, &g11, &psi[0])?;
    let (l_psi2, r2) = fit(&f2, &g22, &psi[1])?;
    Ok(ManifoldOracle {
        g11,
        g12,
        g22,
        l,
        l_psi2,
        fit_residual: r1.max(r2),
        projection_leftover: left11.max(left22).max(left12),
    })
}

/// L² norm of `(L - 2 beta) g11 + P_s N(psi_1, psi_1)` for given coefficients,
/// with `L` applied pointwise from derivatives of the modal field.
pub fn manifold_residual(coeffs: &ManifoldCoeffs, model: &ReducedModel, d: &DimensionlessParams) -> Result<f64> {
    let dc = critical_params(model, d);
    let grid = Grid::new(model.alpha, model.m_c);
    let eig = &model.eigenvector;
    let (p1, p2) = (grid.sample(&eig.profile(1)), grid.sample(&eig.profile(2)));
    let psi = [Pair::of(&p1), Pair::of(&p2)];
    let forcing = project_stable(&grid, nonlinear(&p1, &p1), &psi);
    let g = grid.sample(&coeffs.g11);
    let (c_v, c_t) = (dc.velocity_coupling(), dc.temperature_coupling());
    let mut lv: Vec<f64> = g
        .iter()
        .map(|p| dc.pr_x * p.v_xx + dc.pr_z * p.v_zz - c_v * p.dx_int_th - 2.0 * model.beta * p.v)
        .collect();
    grid.remove_vertical_mean(&mut lv);
    let lt: Vec<f64> = g
        .iter()
        .map(|p| p.th_xx + dc.kappa_a * p.th_zz - c_t * p.w - 2.0 * model.beta * p.th)
        .collect();
    let res = Pair {
        v: lv.iter().zip(&forcing.v).map(|(a, b)| a + b).collect(),
        t: lt.iter().zip(&forcing.t).map(|(a, b)| a + b).collect(),
    };
    Ok(grid.dot(&res, &res).sqrt())
}
