use serde::{Deserialize, Serialize};

use super::{diffusion_rates, eigenvalues, mode_matrix, Branch, ModeIndex};
use crate::dns::state::C64;
use crate::error::{domain, Error, Result};
use crate::field::SparseField;
use crate::params::DimensionlessParams;

/// Eigenvector of the mode problem with unit-norm real profiles.
///
/// The complex coefficients multiply `e^{ikx} cos(n pi z)` and
/// `e^{ikx} sin(n pi z)`. Profile 1 is the real part and profile 2 the
/// imaginary part of the resulting complex field. With `A` real,
/// `coeff_theta = -i A coeff_v` and `coeff_v = v* > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvector {
    pub mode: ModeIndex,
    pub branch: Branch,
    pub rayleigh: f64,
    pub beta: f64,
    pub alpha: f64,
    pub coeff_v: C64,
    pub coeff_theta: C64,
}

impl Eigenvector {
    /// `A` in `theta = -i A v`; `None` when the velocity coefficient vanishes.
    pub fn a_coefficient(&self) -> Option<f64> {
        if self.coeff_v.norm() == 0.0 {
            return None;
        }
        Some((self.coeff_theta / (C64::new(0.0, -1.0) * self.coeff_v)).re)
    }

    /// `(v*)^2`, the squared velocity amplitude.
    pub fn norm_sq(&self) -> f64 {
        self.coeff_v.norm_sqr()
    }

    /// Real profile `j` (1 or 2) as a sparse modal field.
    pub fn profile(&self, j: u8) -> SparseField {
        let (m, n) = (self.mode.m, self.mode.n);
        let rot = if j == 2 {
            C64::new(0.0, -1.0)
        } else {
            C64::new(1.0, 0.0)
        };
        let mut f = SparseField::new(self.alpha);
        if m == 0 {
            if j == 1 {
                f.add_v(0, n, C64::new(self.coeff_v.re, 0.0));
                f.add_theta(0, n, C64::new(self.coeff_theta.re, 0.0));
            }
            return f;
        }
        f.add_v_real(m, n, 0.5 * rot * self.coeff_v);
        f.add_theta_real(m, n, 0.5 * rot * self.coeff_theta);
        f
    }

    /// Largest residual of `(L - beta) (v, theta) = 0` over both rows.
    pub fn residual(&self, d: &DimensionlessParams) -> f64 {
        let d = d.with_rayleigh(self.rayleigh).with_sign(1);
        let l = mode_matrix(self.mode, &d);
        let u = [self.coeff_v, self.coeff_theta];
        (0..2)
            .map(|r| (l[r][0] * u[0] + l[r][1] * u[1] - self.beta * u[r]).norm())
            .fold(0.0, f64::max)
    }
}

/// Eigenvector of mode `(m, n)` on `branch` at Rayleigh number `r`, heated
/// from below.
pub fn eigenvector(mode: ModeIndex, branch: Branch, r: f64, d: &DimensionlessParams) -> Result<Eigenvector> {
    if mode.n < 1 {
        return Err(domain("n", "vertical index must be at least 1"));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(domain("rayleigh", format!("must be non-negative, got {r}")));
    }
    let beta = eigenvalues(mode, r, d).beta(branch);
    let (a1, a2) = diffusion_rates(mode, d);
    let s = r * mode.wavenumber(d.alpha) / mode.q();
    let (mut cv, mut ct) = if mode.m == 0 {
        if (a1 + beta).abs() <= (a2 + beta).abs() {
            (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        } else {
            (C64::new(0.0, 0.0), C64::new(1.0, 0.0))
        }
    } else {
        if branch == Branch::Plus && s != 0.0 && a2 + beta <= 0.0 {
            return Err(Error::Internal(format!(
                "non-positive denominator a + kappa_a q^2 + beta = {}",
                a2 + beta
            )));
        }
        if (a2 + beta).abs() >= (a1 + beta).abs() {
            (C64::new(1.0, 0.0), C64::new(0.0, -s / (a2 + beta)))
        } else {
            (C64::new(s / (a1 + beta), 0.0), C64::new(0.0, -1.0))
        }
    };
    if cv.re < 0.0 {
        cv = -cv;
        ct = -ct;
    }
    let area = if mode.m == 0 { 0.5 } else { 0.25 } * d.alpha;
    let norm = (area * (cv.norm_sqr() + ct.norm_sqr())).sqrt();
    cv /= norm;
    ct /= norm;
    Ok(Eigenvector {
        mode,
        branch,
        rayleigh: r,
        beta,
        alpha: d.alpha,
        coeff_v: cv,
        coeff_theta: ct,
    })
}
