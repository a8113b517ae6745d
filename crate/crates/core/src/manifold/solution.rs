use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ReducedModel;
use crate::dns::state::C64;
use crate::error::{domain, Error, Result};
use crate::field::SparseField;
use crate::params::{rayleigh_from_delta_t, PhysicalParams};

/// Conversion factors from dimensionless to SI quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalScales {
    /// `H` (m).
    pub length: f64,
    /// `kappa_x / H` (m/s).
    pub velocity: f64,
    /// `H^2 / kappa_x` (s).
    pub time: f64,
    /// `|T0 - T1| / R`, or `kappa_x^2 / (H^3 rho0 g beta)` when isothermal (K).
    pub temperature: f64,
}

impl DimensionalScales {
    pub fn from_physicals(p: &PhysicalParams) -> Result<Self> {
        p.validate()?;
        let diff = (p.t0 - p.t1).abs();
        let temperature = if diff == 0.0 {
            p.kappa_x * p.kappa_x / (p.depth_h.powi(3) * p.rho0 * p.g * p.beta)
        } else {
            diff / rayleigh_from_delta_t(diff, p)?
        };
        Ok(Self {
            length: p.depth_h,
            velocity: p.kappa_x / p.depth_h,
            time: p.depth_h * p.depth_h / p.kappa_x,
            temperature,
        })
    }
}

/// Leading-order steady state attached to a ring point `(s1, s2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationSolution {
    pub s1: f64,
    pub s2: f64,
    /// `(v, theta)` in dimensionless variables.
    pub field: SparseField,
    pub dimensional: Option<DimensionalScales>,
}

impl BifurcationSolution {
    pub fn eval(&self, x: f64, z: f64) -> (f64, f64) {
        self.field.eval(x, z)
    }

    /// `(v [m/s], temperature perturbation [K])` at dimensional position
    /// `(x, z)` in metres, when physicals were attached.
    pub fn eval_dimensional(&self, x: f64, z: f64) -> Option<(f64, f64)> {
        self.dimensional.map(|s| {
            let (v, th) = self.field.eval(x / s.length, z / s.length);
            (v * s.velocity, th * s.temperature)
        })
    }
}

/// `s1 psi_1 + s2 psi_2 + (s1^2 + s2^2) g`.
pub fn bifurcated_state(
    s1: f64,
    s2: f64,
    model: &ReducedModel,
    p: Option<&PhysicalParams>,
) -> Result<BifurcationSolution> {
    let eig = &model.eigenvector;
    let field = eig
        .profile(1)
        .scaled(s1)
        .axpy(s2, &eig.profile(2))
        .axpy(s1 * s1 + s2 * s2, &model.g_field());
    let dimensional = p.map(DimensionalScales::from_physicals).transpose()?;
    Ok(BifurcationSolution {
        s1,
        s2,
        field,
        dimensional,
    })
}

/// `psi(x, z) = int_0^z v(x, xi) d xi`, kept in modal form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamFunction {
    pub alpha: f64,
    /// Coefficients of `e^{ikx} sin(n pi z)`.
    pub sine: BTreeMap<(i64, u32), C64>,
    /// Coefficients of `e^{ikx} z` from any `n = 0` velocity content.
    pub linear: BTreeMap<i64, C64>,
}

impl StreamFunction {
    /// Stream function of the velocity part of any modal field.
    pub fn from_field(field: &SparseField) -> Self {
        let mut sine = BTreeMap::new();
        let mut linear = BTreeMap::new();
        for (&(m, n), &c) in &field.v {
            if n == 0 {
                linear.insert(m, c);
            } else {
                sine.insert((m, n), c / (n as f64 * PI));
            }
        }
        Self {
            alpha: field.alpha,
            sine,
            linear,
        }
    }

    pub fn eval(&self, x: f64, z: f64) -> f64 {
        let k = |m: i64| 2.0 * PI * m as f64 / self.alpha;
        let s: f64 = self
            .sine
            .iter()
            .map(|(&(m, n), c)| (c * C64::from_polar(1.0, k(m) * x)).re * (n as f64 * PI * z).sin())
            .sum();
        let l: f64 = self
            .linear
            .iter()
            .map(|(&m, c)| (c * C64::from_polar(1.0, k(m) * x)).re * z)
            .sum();
        s + l
    }

    /// Samples on `nx` points in `[0, alpha)` and `nz + 1` points in `[0, 1]`.
    pub fn sample(&self, nx: usize, nz: usize) -> Result<StreamGrid> {
        if nx < 1 || nz < 1 {
            return Err(domain("grid", "needs at least one interval in each direction"));
        }
        let mut values = Vec::with_capacity(nx * (nz + 1));
        for i in 0..nx {
            for j in 0..=nz {
                values.push(self.eval(self.alpha * i as f64 / nx as f64, j as f64 / nz as f64));
            }
        }
        Ok(StreamGrid {
            alpha: self.alpha,
            nx,
            nz,
            values,
        })
    }
}

pub fn stream_function(sol: &BifurcationSolution) -> StreamFunction {
    StreamFunction::from_field(&sol.field)
}

/// Stream function samples, row-major in `x` with `nz + 1` vertical points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamGrid {
    pub alpha: f64,
    pub nx: usize,
    pub nz: usize,
    pub values: Vec<f64>,
}

impl StreamGrid {
    pub fn x(&self, i: usize) -> f64 {
        self.alpha * i as f64 / self.nx as f64
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 / self.nz as f64
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.nz + 1) + j]
    }

    /// Values along `z = 1/2`, interpolating linearly when no row sits there.
    pub fn mid_depth(&self) -> Vec<f64> {
        let pos = 0.5 * self.nz as f64;
        let (j0, frac) = (pos.floor() as usize, pos - pos.floor());
        (0..self.nx)
            .map(|i| {
                if frac == 0.0 {
                    self.at(i, j0)
                } else {
                    (1.0 - frac) * self.at(i, j0) + frac * self.at(i, j0 + 1)
                }
            })
            .collect()
    }

    /// Normalized inner product of two samplings of the same grid.
    pub fn correlation(&self, other: &StreamGrid) -> Result<f64> {
        if self.nx != other.nx || self.nz != other.nz {
            return Err(domain("grid", "correlation needs identical grids"));
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let norm = (dot(&self.values, &self.values) * dot(&other.values, &other.values)).sqrt();
        if norm == 0.0 {
            return Err(Error::Undefined("correlation with an identically zero field".into()));
        }
        Ok(dot(&self.values, &other.values) / norm)
    }

    /// `x,z,psi` rows with a header.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x,z,psi")?;
        for i in 0..self.nx {
            for j in 0..=self.nz {
                writeln!(w, "{},{},{}", self.x(i), self.z(j), self.at(i, j))?;
            }
        }
        Ok(())
    }

    /// gnuplot script drawing the contour figure from the CSV written by
    /// [`StreamGrid::write_csv`].
    pub fn plot_script(&self, csv_path: &str, output_png: &str) -> String {
        format!(
            "set datafile separator ','\n\
             set terminal pngcairo size 1200,400\n\
             set output '{output_png}'\n\
             set xlabel 'x'\nset ylabel 'z'\n\
             set xrange [0:{alpha}]\nset yrange [0:1]\n\
             set view map\nset contour base\nset cntrparam levels 12\n\
             unset surface\nset dgrid3d {nz1},{nx},1\n\
             splot '{csv_path}' every ::1 using 1:2:3 with lines notitle\n",
            alpha = self.alpha,
            nz1 = self.nz + 1,
            nx = self.nx,
        )
    }
}

/// Number of sign regions of `psi` along mid-depth over one period.
pub fn count_cells(grid: &StreamGrid) -> Result<usize> {
    let line = grid.mid_depth();
    let peak = line.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if peak == 0.0 {
        return Ok(0);
    }
    let tol = 1e-12 * peak;
    let signs: Vec<i8> = line
        .iter()
        .filter(|v| v.abs() > tol)
        .map(|v| if *v > 0.0 { 1 } else { -1 })
        .collect();
    let changes = (0..signs.len())
        .filter(|&i| signs[i] != signs[(i + 1) % signs.len()])
        .count();
    let cells = changes.max(1);
    if grid.nx < 2 * cells || grid.nx < 4 {
        return Err(Error::UnderResolved(format!(
            "{} samples cannot resolve {cells} cells; use at least {}",
            grid.nx,
            (2 * cells).max(4)
        )));
    }
    Ok(cells)
}
