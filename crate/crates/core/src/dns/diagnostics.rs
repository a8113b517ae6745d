//! Norms, energy-balance terms and projections of a spectral state, plus the
//! exponential-rate fit used on norm time series.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::solver::vertical_velocity;
use super::state::{Parity, SpectralState};
use crate::error::{Error, Result};
use crate::params::DimensionlessParams;

/// Column order of the time-series CSV.
pub const SERIES_COLUMNS: [&str; 11] = [
    "t",
    "l2_v",
    "l2_theta",
    "h1_v",
    "h1_theta",
    "h2_v",
    "h2_theta",
    "x1",
    "x2",
    "energy_residual",
    "compat_residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub l2_v: f64,
    pub l2_theta: f64,
    pub h1_v: f64,
    pub h1_theta: f64,
    pub h2_v: f64,
    pub h2_theta: f64,
    /// `int Pr_x v_x^2 + Pr_z v_z^2`.
    pub dissipation_v: f64,
    /// `int theta_x^2 + kappa_a theta_z^2`.
    pub dissipation_theta: f64,
    /// Sum of the two dissipation integrals.
    pub dissipation: f64,
    /// `2 (c_v - c_theta) int theta w`, the buoyancy contribution to
    /// `d/dt (||v||^2 + ||theta||^2)`.
    pub cross_term: f64,
    /// `|dissipation_theta - dissipation_v|`.
    pub steady_balance: f64,
    pub x1: f64,
    pub x2: f64,
    /// `|d/dt(||v||^2 + ||theta||^2) + 2 dissipation - cross_term|` over the last step.
    pub energy_residual: f64,
    /// `||psi(., 1)||` with `psi = int_0^z v`.
    pub compat_residual: f64,
}

impl Diagnostics {
    pub fn compute(
        s: &SpectralState,
        d: &DimensionlessParams,
        projectors: Option<&[SpectralState; 2]>,
        energy_residual: f64,
    ) -> Self {
        let (h1_v, h1_theta) = s.h1_norms();
        let (h2_v, h2_theta) = s.h2_norms();
        let (dv, dt, cross) = energy_terms(s, d);
        let (x1, x2) = match projectors {
            Some([p1, p2]) => (s.inner(p1).unwrap_or(0.0), s.inner(p2).unwrap_or(0.0)),
            None => (0.0, 0.0),
        };
        Self {
            t: s.t,
            l2_v: s.l2_v(),
            l2_theta: s.l2_theta(),
            h1_v,
            h1_theta,
            h2_v,
            h2_theta,
            dissipation_v: dv,
            dissipation_theta: dt,
            dissipation: dv + dt,
            cross_term: cross,
            steady_balance: (dt - dv).abs(),
            x1,
            x2,
            energy_residual,
            compat_residual: compat_residual(s),
        }
    }

    pub fn l2(&self) -> f64 {
        self.l2_v.hypot(self.l2_theta)
    }

    pub fn h1(&self) -> f64 {
        self.h1_v.hypot(self.h1_theta)
    }

    pub fn h2(&self) -> f64 {
        self.h2_v.hypot(self.h2_theta)
    }

    pub fn amplitude_radius(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    fn row(&self) -> [f64; 11] {
        [
            self.t,
            self.l2_v,
            self.l2_theta,
            self.h1_v,
            self.h1_theta,
            self.h2_v,
            self.h2_theta,
            self.x1,
            self.x2,
            self.energy_residual,
            self.compat_residual,
        ]
    }
}

/// `(dissipation_v, dissipation_theta, cross_term)`.
pub fn energy_terms(s: &SpectralState, d: &DimensionlessParams) -> (f64, f64, f64) {
    let dv = s.weighted_sq(&s.v_hat, Parity::Cos, |k, q| d.pr_x * k * k + d.pr_z * q * q);
    let dt = s.weighted_sq(&s.theta_hat, Parity::Sin, |k, q| k * k + d.kappa_a * q * q);
    let w = vertical_velocity(s);
    let cross = 2.0 * (d.velocity_coupling() - d.temperature_coupling()) * s.inner_field(&s.theta_hat, &w, Parity::Sin);
    (dv, dt, cross)
}

/// `||psi(., 1)||_{L^2(0, alpha)}` evaluated from the modal sum.
pub fn compat_residual(s: &SpectralState) -> f64 {
    let mut total = 0.0;
    for (i, _m, _k) in s.wavenumbers() {
        let mut c = s.v_hat[[i, 0]];
        for n in 1..=s.n_max() {
            let q = n as f64 * PI;
            c += s.v_hat[[i, n]] * (q.sin() / q);
        }
        total += c.norm_sqr();
    }
    (s.alpha() * total).sqrt()
}

/// Writes diagnostics in the [`SERIES_COLUMNS`] layout.
pub fn write_series_csv(series: &[Diagnostics], mut w: impl Write) -> Result<()> {
    writeln!(w, "{}", SERIES_COLUMNS.join(","))?;
    for d in series {
        let row: Vec<String> = d.row().iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Least-squares fit of `log(norm) = rate t + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for a series with no spread.
    pub r_squared: f64,
    pub samples: usize,
}

/// Fits the samples with `window.0 <= t <= window.1`.
pub fn decay_rate_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!("{} samples in window, need at least 10", pts.len())));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Fit(format!("non-positive norm {v} at t = {t}")));
    }
    let n = pts.len() as f64;
    let logs: Vec<(f64, f64)> = pts.iter().map(|(t, v)| (*t, v.ln())).collect();
    let (mt, my) = logs.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / n, b + y / n));
    let (sxx, sxy, syy) = logs.iter().fold((0.0, 0.0, 0.0), |(a, b, c), (t, y)| {
        let (dt, dy) = (t - mt, y - my);
        (a + dt * dt, b + dt * dy, c + dy * dy)
    });
    if sxx == 0.0 {
        return Err(Error::Fit("all samples share one time".into()));
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mt;
    let sse: f64 = logs.iter().map(|(t, y)| (y - intercept - rate * t).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(DecayFit {
        rate,
        intercept,
        r_squared,
        samples: pts.len(),
    })
}

/// Largest coefficient-wise difference of two tables.
#[cfg(test)]
pub(crate) fn max_abs_diff(a: &ndarray::Array2<super::state::C64>, b: &ndarray::Array2<super::state::C64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
