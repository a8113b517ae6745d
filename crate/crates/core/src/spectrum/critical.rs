use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{dispersion_r2, eigenvalues, ModeIndex};
use crate::error::{domain, Error, Result};
use crate::params::{delta_t_from_rayleigh, nondimensionalize, DimensionlessParams, PhysicalParams};

/// Largest vertical index scanned when checking that `n = 1` is critical.
pub const N_CHECK: u32 = 8;

const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStatus {
    Interior,
    /// The minimizer sits on the search bound; the true minimum may be larger in `m`.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub r_c: f64,
    pub m_c: i64,
    /// Critical temperature difference in kelvin, when physicals were supplied.
    pub t_c: Option<f64>,
    /// Central-difference `d beta_plus / dR` at `R_c`.
    pub transversal_slope: f64,
    /// `beta_plus(m_c, 1)` evaluated at `R_c`.
    pub neutral_residual: f64,
    pub status: SearchStatus,
    /// False if some `(m, n)` with `n <= N_CHECK` goes neutral below `R_c`.
    pub n1_minimal: bool,
    pub m_max: i64,
}

/// `4 m^2 / (Pr_a alpha^2) + kappa_a alpha^2 / (4 m^2)`.
pub fn wavenumber_cost(m: i64, d: &DimensionlessParams) -> f64 {
    let m2 = (m * m) as f64;
    let a2 = d.alpha * d.alpha;
    4.0 * m2 / (d.pr_a * a2) + d.kappa_a * a2 / (4.0 * m2)
}

/// Minimizes the neutral Rayleigh number over `m = 1..=m_max` at `n = 1`.
pub fn critical_search(d: &DimensionlessParams, m_max: i64) -> Result<CriticalPoint> {
    if m_max < 1 {
        return Err(domain("m_max", format!("must be at least 1, got {m_max}")));
    }
    let mut best = (1, wavenumber_cost(1, d));
    for m in 2..=m_max {
        let f = wavenumber_cost(m, d);
        if f < best.1 * (1.0 - TIE_TOL) {
            best = (m, f);
        }
    }
    let m_c = best.0;
    let r2 = dispersion_r2(ModeIndex { m: m_c, n: 1 }, d)?;
    let r_c = r2.sqrt();
    let mode = ModeIndex { m: m_c, n: 1 };
    let neutral_residual = eigenvalues(mode, r_c, d).beta_plus;
    let h = 1e-6 * r_c;
    let slope = (eigenvalues(mode, r_c + h, d).beta_plus - eigenvalues(mode, r_c - h, d).beta_plus) / (2.0 * h);
    let floor = r2 * (1.0 - 1e-12);
    let n1_minimal =
        (1..=m_max).all(|m| (2..=N_CHECK).all(|n| dispersion_r2(ModeIndex { m, n }, d).map_or(true, |v| v >= floor)));
    let status = if m_c == m_max {
        SearchStatus::Truncated
    } else {
        SearchStatus::Interior
    };
    Ok(CriticalPoint {
        r_c,
        m_c,
        t_c: None,
        transversal_slope: slope,
        neutral_residual,
        status,
        n1_minimal,
        m_max,
    })
}

/// [`critical_search`] on the nondimensionalized physicals, with `t_c`
/// populated and cross-checked against the dimensional closed form.
pub fn critical_temperature(p: &PhysicalParams, m_max: i64) -> Result<CriticalPoint> {
    let d = nondimensionalize(p)?;
    let mut cp = critical_search(&d, m_max)?;
    let t_c = delta_t_from_rayleigh(cp.r_c, p)?;
    let direct = direct_critical_temperature(p, cp.m_c);
    if ((t_c - direct) / direct).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "critical temperature mismatch: {t_c} from R_c versus {direct} from the closed form"
        )));
    }
    cp.t_c = Some(t_c);
    Ok(cp)
}

/// Closed form of the critical temperature difference in dimensional
/// variables for a given critical wavenumber.
pub fn direct_critical_temperature(p: &PhysicalParams, m_c: i64) -> f64 {
    let pref = PI.powi(4) * p.mu_z * p.kappa_x / (p.depth_h.powi(3) * p.rho0 * p.g * p.beta);
    let m2 = (m_c * m_c) as f64;
    let (h2, l2) = (p.depth_h * p.depth_h, p.length_l * p.length_l);
    pref * (p.kappa_z * p.mu_x / (p.kappa_x * p.mu_z)
        + 1.0
        + 4.0 * m2 * p.mu_x * h2 / (p.mu_z * l2)
        + p.kappa_z * l2 / (4.0 * m2 * p.kappa_x * h2))
}
