use std::f64::consts::PI;

use nalgebra::{linalg::Schur, DMatrix};

use crate::dns::state::C64;
use crate::error::{domain, Error, Result};
use crate::params::DimensionlessParams;
use crate::quadrature::gauss_legendre;

const X_POINTS: usize = 8;
const INNER_NODES: usize = 24;

type Profile = Box<dyn Fn(f64) -> f64>;

/// Pointwise data of one basis function on the quadrature grid.
struct Sampled {
    value: Vec<f64>,
    lap_x: Vec<f64>,
    lap_z: Vec<f64>,
    /// `d_x int_0^z f`.
    dx_int: Vec<f64>,
}

/// Eigenvalues of a Galerkin discretization of the linearized operator for a
/// single horizontal index `m`, assembled by quadrature on the basis
/// `{cos(kx) cos(j pi z)} x {sin(kx) sin(j pi z)}`, `j = 1..=n_max`, sorted by
/// decreasing real part.
pub fn dense_oracle_spectrum(r: f64, d: &DimensionlessParams, m: i64, n_max: usize) -> Result<Vec<C64>> {
    if n_max < 2 {
        return Err(domain("n_max", "the oracle needs at least two vertical modes"));
    }
    let d = d.with_rayleigh(r);
    let k = 2.0 * PI * m as f64 / d.alpha;
    let xs: Vec<f64> = (0..X_POINTS).map(|i| d.alpha * i as f64 / X_POINTS as f64).collect();
    let wx = d.alpha / X_POINTS as f64;
    let (zs, wz) = gauss_legendre(2 * n_max + 24, 0.0, 1.0);
    let (inner_nodes, inner_weights) = gauss_legendre(INNER_NODES, 0.0, 1.0);
    let weights: Vec<f64> = xs.iter().flat_map(|_| wz.iter().map(move |w| w * wx)).collect();

    let (cx, dcx): (Profile, Profile) = (
        Box::new(move |x: f64| (k * x).cos()),
        Box::new(move |x: f64| -k * (k * x).sin()),
    );
    let (sx, dsx): (Profile, Profile) = if m == 0 {
        (Box::new(|_| 1.0), Box::new(|_| 0.0))
    } else {
        (
            Box::new(move |x: f64| (k * x).sin()),
            Box::new(move |x: f64| k * (k * x).cos()),
        )
    };

    let sample = |xf: &dyn Fn(f64) -> f64, dxf: &dyn Fn(f64) -> f64, zf: &dyn Fn(f64) -> f64, q: f64| {
        let mut s = Sampled {
            value: Vec::new(),
            lap_x: Vec::new(),
            lap_z: Vec::new(),
            dx_int: Vec::new(),
        };
        for &x in &xs {
            for &z in &zs {
                let integral: f64 = inner_nodes
                    .iter()
                    .zip(&inner_weights)
                    .map(|(t, w)| w * z * zf(t * z))
                    .sum();
                s.value.push(xf(x) * zf(z));
                s.lap_x.push(-k * k * xf(x) * zf(z));
                s.lap_z.push(-q * q * xf(x) * zf(z));
                s.dx_int.push(dxf(x) * integral);
            }
        }
        s
    };
    let v_basis: Vec<Sampled> = (1..=n_max)
        .map(|j| {
            let q = j as f64 * PI;
            sample(&*cx, &*dcx, &move |z: f64| (q * z).cos(), q)
        })
        .collect();
    let t_basis: Vec<Sampled> = (1..=n_max)
        .map(|j| {
            let q = j as f64 * PI;
            sample(&*sx, &*dsx, &move |z: f64| (q * z).sin(), q)
        })
        .collect();

    let nz = zs.len();
    let project = |f: &mut Vec<f64>| {
        for a in 0..xs.len() {
            let row = &mut f[a * nz..(a + 1) * nz];
            let mean: f64 = row.iter().zip(&wz).map(|(v, w)| v * w).sum();
            row.iter_mut().for_each(|v| *v -= mean);
        }
    };
    let dot = |f: &[f64], g: &[f64]| -> f64 { f.iter().zip(g).zip(&weights).map(|((a, b), w)| a * b * w).sum() };

    // Columns: operator applied to each basis function, split into components.
    let dim = 2 * n_max;
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut stiff = DMatrix::<f64>::zeros(dim, dim);
    let (c_v, c_t) = (d.velocity_coupling(), d.temperature_coupling());
    for j in 0..dim {
        let (lv, lt): (Vec<f64>, Vec<f64>) = if j < n_max {
            let b = &v_basis[j];
            let mut lv: Vec<f64> = b
                .lap_x
                .iter()
                .zip(&b.lap_z)
                .map(|(xx, zz)| d.pr_x * xx + d.pr_z * zz)
                .collect();
            project(&mut lv);
            let lt: Vec<f64> = b.dx_int.iter().map(|w| c_t * w).collect();
            (lv, lt)
        } else {
            let b = &t_basis[j - n_max];
            let mut lv: Vec<f64> = b.dx_int.iter().map(|w| -c_v * w).collect();
            project(&mut lv);
            let lt: Vec<f64> = b
                .lap_x
                .iter()
                .zip(&b.lap_z)
                .map(|(xx, zz)| xx + d.kappa_a * zz)
                .collect();
            (lv, lt)
        };
        for i in 0..dim {
            let (tv, tt) = if i < n_max {
                (Some(&v_basis[i].value), None)
            } else {
                (None, Some(&t_basis[i - n_max].value))
            };
            let bj = if j < n_max {
                &v_basis[j].value
            } else {
                &t_basis[j - n_max].value
            };
            let same_block = (i < n_max) == (j < n_max);
            if let Some(tv) = tv {
                stiff[(i, j)] = dot(tv, &lv);
                if same_block {
                    gram[(i, j)] = dot(tv, bj);
                }
            }
            if let Some(tt) = tt {
                stiff[(i, j)] = dot(tt, &lt);
                if same_block {
                    gram[(i, j)] = dot(tt, bj);
                }
            }
        }
    }
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Eigen("singular Gram matrix".into()))?;
    let op = gram_inv * stiff;
    let schur =
        Schur::try_new(op, 1e-14, 10_000).ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    let mut eig: Vec<C64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|c| C64::new(c.re, c.im))
        .collect();
    eig.sort_by(|a, b| b.re.total_cmp(&a.re));
    Ok(eig)
}
