//! Center-manifold reduction near the onset of convection.
//!
//! With `psi_1`, `psi_2` the two real critical eigenfunctions, the manifold is
//! `Phi(x) = g (x_1^2 + x_2^2)` to quadratic order, where `g` is a purely
//! thermal `sin(2 pi z)` profile, and the reduced dynamics are
//!
//! ```text
//! dx_i/dt = beta x_i + l x_i (x_1^2 + x_2^2),    i = 1, 2.
//! ```
//!
//! [`ReducedModel::l`] is the cubic coefficient obtained by projecting
//! `N(psi_1, g)` onto `psi_1`:
//!
//! ```text
//! l = -pi^2 A^2 m_c^2 (v*)^4 / (2 alpha (4 kappa_a pi^2 + 2 beta))
//! ```
//!
//! Two published closed forms are carried alongside for comparison
//! ([`ReducedModel::l_proof_form`], [`ReducedModel::l_theorem_form`]); both
//! disagree with the quadrature oracle in [`oracle`].

mod amplitude;
pub mod oracle;
mod solution;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dns::state::C64;
use crate::error::{domain, Error, Result};
use crate::field::SparseField;
use crate::params::DimensionlessParams;
use crate::spectrum::{critical_search, eigenvector, Branch, Eigenvector, ModeIndex};

pub use amplitude::{amplitude_rhs, integrate_amplitudes, AmplitudeState, Trajectory};
pub use solution::{
    bifurcated_state, count_cells, stream_function, BifurcationSolution, DimensionalScales, StreamFunction, StreamGrid,
};

/// Quadratic manifold coefficients `g_ij` multiplying `x_i x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldCoeffs {
    pub g11: SparseField,
    pub g12: SparseField,
    pub g22: SparseField,
}

/// Amplitude equations at one Rayleigh number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedModel {
    /// `beta_plus(m_c, 1)`.
    pub beta: f64,
    pub l: f64,
    pub a_mc: f64,
    /// `(v*)^2`.
    pub norm_sq: f64,
    pub m_c: i64,
    pub alpha: f64,
    pub kappa_a: f64,
    pub rayleigh: f64,
    pub r_c: f64,
    /// Coefficient of `sin(2 pi z)` in the thermal part of `g11 = g22`.
    pub g_amplitude: f64,
    /// `(16 - 3 pi^2) A^2 m_c^2 (v*)^2 / (12 alpha (4 kappa_a pi^2 + 2 beta))`.
    pub l_proof_form: f64,
    /// `16 (16 - 3 pi^2) A^2 m_c^2 (1 + A^2)^{-2} / (12 alpha^3 (4 kappa_a pi^2 + 2 beta))`.
    pub l_theorem_form: f64,
    pub eigenvector: Eigenvector,
}

/// Ring radius of the attractor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RingRadius {
    Ring(f64),
    /// `beta = 0`: the ring has shrunk onto the origin.
    Degenerate,
}

impl RingRadius {
    pub fn radius(&self) -> f64 {
        match self {
            RingRadius::Ring(r) => *r,
            RingRadius::Degenerate => 0.0,
        }
    }
}

impl ReducedModel {
    pub fn critical_mode(&self) -> ModeIndex {
        ModeIndex { m: self.m_c, n: 1 }
    }

    /// The common manifold coefficient `g11 = g22` as a field.
    pub fn g_field(&self) -> SparseField {
        let mut g = SparseField::new(self.alpha);
        g.add_theta(0, 2, C64::new(self.g_amplitude, 0.0));
        g
    }

    /// `4 kappa_a pi^2 + 2 beta`.
    pub fn resolvent_denominator(&self) -> f64 {
        4.0 * self.kappa_a * PI * PI + 2.0 * self.beta
    }
}

/// `g11 = g22 = (0, g sin(2 pi z))`, `g12 = 0`, with
/// `g = -A pi m_c (v*)^2 / (alpha (4 kappa_a pi^2 + 2 beta))`.
pub fn manifold_coefficients(d: &DimensionlessParams, eig: &Eigenvector) -> Result<ManifoldCoeffs> {
    let a = eig
        .a_coefficient()
        .ok_or_else(|| Error::Internal("critical eigenvector has no velocity component".into()))?;
    let denom = 4.0 * d.kappa_a * PI * PI + 2.0 * eig.beta;
    if denom <= 0.0 {
        return Err(Error::Internal(format!(
            "vanishing resolvent denominator 4 kappa_a pi^2 + 2 beta = {denom}"
        )));
    }
    let g = -a * PI * eig.mode.m as f64 * eig.norm_sq() / (d.alpha * denom);
    let mut g11 = SparseField::new(d.alpha);
    g11.add_theta(0, 2, C64::new(g, 0.0));
    Ok(ManifoldCoeffs {
        g22: g11.clone(),
        g11,
        g12: SparseField::new(d.alpha),
    })
}

/// Reduced model at the Rayleigh number carried by `d`, with the critical
/// wavenumber searched over `1..=m_max`.
pub fn bifurcation_coefficient(d: &DimensionlessParams, m_max: i64) -> Result<ReducedModel> {
    if d.sign != 1 {
        return Err(domain("sign", "the reduction applies to heating from below"));
    }
    let cp = critical_search(d, m_max)?;
    let mode = ModeIndex { m: cp.m_c, n: 1 };
    let eig = eigenvector(mode, Branch::Plus, d.rayleigh, d)?;
    let coeffs = manifold_coefficients(d, &eig)?;
    let g = coeffs.g11.theta[&(0, 2)].re;
    let a = eig.a_coefficient().unwrap_or(0.0);
    let v2 = eig.norm_sq();
    let m = cp.m_c as f64;
    let denom = 4.0 * d.kappa_a * PI * PI + 2.0 * eig.beta;
    let c = 16.0 - 3.0 * PI * PI;
    Ok(ReducedModel {
        beta: eig.beta,
        l: 0.5 * PI * m * a * v2 * g,
        a_mc: a,
        norm_sq: v2,
        m_c: cp.m_c,
        alpha: d.alpha,
        kappa_a: d.kappa_a,
        rayleigh: d.rayleigh,
        r_c: cp.r_c,
        g_amplitude: g,
        l_proof_form: c * a * a * m * m * v2 / (12.0 * d.alpha * denom),
        l_theorem_form: 16.0 * c * a * a * m * m / (1.0 + a * a).powi(2) / (12.0 * d.alpha.powi(3) * denom),
        eigenvector: eig,
    })
}

/// `sqrt(-beta / l)`; no ring exists for `beta < 0`.
pub fn ring_radius(model: &ReducedModel) -> Result<RingRadius> {
    if model.beta < 0.0 {
        return Err(Error::NoRing { beta: model.beta });
    }
    if model.beta == 0.0 {
        return Ok(RingRadius::Degenerate);
    }
    if model.l >= 0.0 {
        return Err(Error::Internal(format!("non-negative cubic coefficient {}", model.l)));
    }
    Ok(RingRadius::Ring((-model.beta / model.l).sqrt()))
}
