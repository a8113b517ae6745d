//! Linear stability of the conductive state.
//!
//! For a horizontal index `m` and vertical index `n` the perturbation system
//! reduces to a 2x2 problem on the coefficients of
//! `e^{i k x} cos(n pi z)` (velocity) and `e^{i k x} sin(n pi z)` (temperature),
//! `k = 2 pi m / alpha`. With `a = k^2` and `q = n pi`,
//!
//! ```text
//! d/dt v = -(Pr_x a + Pr_z q^2) v + c_v (i k / q) theta
//! d/dt theta = -(a + kappa_a q^2) theta + c_theta (i k / q) v
//! ```
//!
//! where `c_v = R^{|sgn|}` and `c_theta = -sgn R`. When heated from below the
//! matrix is Hermitian and both eigenvalues are real.

mod critical;
mod eigenvector;
mod exchange;
mod oracle;
mod quotient;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dns::state::C64;
use crate::error::{domain, Error, Result};
use crate::params::DimensionlessParams;

pub use critical::{critical_search, critical_temperature, CriticalPoint, SearchStatus, N_CHECK};
pub use eigenvector::{eigenvector, Eigenvector};
pub use exchange::{exchange_of_stabilities_report, ExchangeReport, ModeRate, Verdict};
pub use oracle::dense_oracle_spectrum;
pub use quotient::rayleigh_quotient;

/// A Fourier mode `e^{i 2 pi m x / alpha}` with vertical index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub m: i64,
    pub n: u32,
}

impl ModeIndex {
    pub fn new(m: i64, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(domain("n", "vertical index must be at least 1"));
        }
        Ok(Self { m, n })
    }

    /// `a = 4 pi^2 m^2 / alpha^2`.
    pub fn a(&self, alpha: f64) -> f64 {
        let k = self.wavenumber(alpha);
        k * k
    }

    pub fn wavenumber(&self, alpha: f64) -> f64 {
        2.0 * PI * self.m as f64 / alpha
    }

    pub fn q(&self) -> f64 {
        self.n as f64 * PI
    }
}

/// Which root of the 2x2 problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub mode: ModeIndex,
    pub a: f64,
    /// Half the negated trace.
    pub big_a: f64,
    pub big_b: f64,
    /// Determinant.
    pub big_c: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
}

impl EigenData {
    pub fn beta(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.beta_plus,
            Branch::Minus => self.beta_minus,
        }
    }
}

/// Diagonal decay rates `(Pr_x a + Pr_z q^2, a + kappa_a q^2)`.
pub fn diffusion_rates(mode: ModeIndex, d: &DimensionlessParams) -> (f64, f64) {
    let a = mode.a(d.alpha);
    let q2 = mode.q() * mode.q();
    (d.pr_x * a + d.pr_z * q2, a + d.kappa_a * q2)
}

/// `R^2` at which `beta_plus(m, n)` vanishes.
pub fn dispersion_r2(mode: ModeIndex, d: &DimensionlessParams) -> Result<f64> {
    if mode.n < 1 {
        return Err(domain("n", "vertical index must be at least 1"));
    }
    if mode.m == 0 {
        return Err(Error::NoNeutralMode);
    }
    let a = mode.a(d.alpha);
    let (a1, a2) = diffusion_rates(mode, d);
    Ok(mode.q() * mode.q() * a1 * a2 / a)
}

/// Real eigenvalues of the heated-from-below mode problem at Rayleigh number `r`.
pub fn eigenvalues(mode: ModeIndex, r: f64, d: &DimensionlessParams) -> EigenData {
    let a = mode.a(d.alpha);
    let q2 = mode.q() * mode.q();
    let (a1, a2) = diffusion_rates(mode, d);
    let coupling = r * r * a / q2;
    let big_a = 0.5 * (a1 + a2);
    let half_gap = 0.5 * (a1 - a2);
    let big_b = (half_gap * half_gap + coupling).sqrt();
    let big_c = a1 * a2 - coupling;
    EigenData {
        mode,
        a,
        big_a,
        big_b,
        big_c,
        beta_plus: -big_c / (big_a + big_b),
        beta_minus: -(big_a + big_b),
    }
}

/// Full 2x2 mode matrix `[[L_vv, L_vt], [L_tv, L_tt]]` for any heating sign,
/// acting on `(v_hat, theta_hat)`.
pub fn mode_matrix(mode: ModeIndex, d: &DimensionlessParams) -> [[C64; 2]; 2] {
    let (a1, a2) = diffusion_rates(mode, d);
    let ik_q = C64::new(0.0, mode.wavenumber(d.alpha) / mode.q());
    [
        [C64::new(-a1, 0.0), ik_q * d.velocity_coupling()],
        [ik_q * d.temperature_coupling(), C64::new(-a2, 0.0)],
    ]
}

/// Eigenvalues of [`mode_matrix`], ordered by decreasing real part.
pub fn mode_eigenvalues(mode: ModeIndex, d: &DimensionlessParams) -> [C64; 2] {
    let l = mode_matrix(mode, d);
    let tr = l[0][0] + l[1][1];
    let half_gap = 0.5 * (l[0][0] - l[1][1]);
    let disc = (half_gap * half_gap + l[0][1] * l[1][0]).sqrt();
    let (p, m) = (0.5 * tr + disc, 0.5 * tr - disc);
    if p.re >= m.re {
        [p, m]
    } else {
        [m, p]
    }
}

/// Column order of the spectrum CSV.
pub const SPECTRUM_COLUMNS: [&str; 8] = ["m", "n", "a", "A", "B", "C", "beta_plus", "beta_minus"];

/// [`eigenvalues`] for `0 <= m <= m_max`, `1 <= n <= n_max`, ordered by `m` then `n`.
pub fn spectrum_table(r: f64, d: &DimensionlessParams, m_max: i64, n_max: u32) -> Result<Vec<EigenData>> {
    if m_max < 0 || n_max < 1 {
        return Err(domain("truncation", "needs m_max >= 0 and n_max >= 1"));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(domain("rayleigh", format!("must be non-negative, got {r}")));
    }
    Ok((0..=m_max)
        .flat_map(|m| (1..=n_max).map(move |n| ModeIndex { m, n }))
        .map(|mode| eigenvalues(mode, r, d))
        .collect())
}

/// Writes rows in the [`SPECTRUM_COLUMNS`] layout.
pub fn write_spectrum_csv(rows: &[EigenData], mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "{}", SPECTRUM_COLUMNS.join(","))?;
    for e in rows {
        writeln!(
            w,
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            e.mode.m, e.mode.n, e.a, e.big_a, e.big_b, e.big_c, e.beta_plus, e.beta_minus
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
