//! Physical inputs, the dimensionless groups of the perturbation system and
//! the thermal-regime classification.
//!
//! Viscosities are named `mu_*` throughout; the same quantities are sometimes
//! written with `nu`. Only their ratios to `kappa_x` enter the dimensionless
//! system.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative half-width of the band classified as [`RegimeTag::CriticalBelow`].
pub const DEFAULT_CRITICAL_TOL: f64 = 1e-9;

/// Dimensional inputs in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Bottom temperature (K).
    pub t0: f64,
    /// Top temperature (K).
    pub t1: f64,
    /// Layer depth `H` (m).
    pub depth_h: f64,
    /// Horizontal period `L` (m).
    pub length_l: f64,
    pub mu_x: f64,
    pub mu_z: f64,
    pub kappa_x: f64,
    pub kappa_z: f64,
    pub rho0: f64,
    /// Thermal expansion coefficient (1/K).
    pub beta: f64,
    pub g: f64,
}

impl PhysicalParams {
    /// Checks that every material and geometric parameter is strictly positive
    /// and finite.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("depth_h", self.depth_h),
            ("length_l", self.length_l),
            ("mu_x", self.mu_x),
            ("mu_z", self.mu_z),
            ("kappa_x", self.kappa_x),
            ("kappa_z", self.kappa_z),
            ("rho0", self.rho0),
            ("beta", self.beta),
            ("g", self.g),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(domain(name, format!("must be positive and finite, got {value}")));
            }
        }
        if !self.t0.is_finite() {
            return Err(domain("t0", "must be finite"));
        }
        if !self.t1.is_finite() {
            return Err(domain("t1", "must be finite"));
        }
        Ok(())
    }

    /// `H^3 rho0 g beta / kappa_x^2`, the factor converting `R^2` into a
    /// temperature difference.
    fn buoyancy_scale(&self) -> f64 {
        self.depth_h.powi(3) * self.rho0 * self.g * self.beta / (self.kappa_x * self.kappa_x)
    }

    /// Same parameters with the top temperature set so that `T0 - T1 = delta_t`.
    pub fn with_temperature_difference(mut self, delta_t: f64) -> Self {
        self.t1 = self.t0 - delta_t;
        self
    }

    /// Parses the `key = value` config grammar.
    ///
    /// Blank lines and `#` comments are ignored. Every key must appear exactly
    /// once: `t0, t1, depth_h, length_l, mu_x, mu_z, kappa_x, kappa_z, rho0,
    /// beta, g`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        const KEYS: [&str; 11] = [
            "t0", "t1", "depth_h", "length_l", "mu_x", "mu_z", "kappa_x", "kappa_z", "rho0", "beta", "g",
        ];
        let mut values: [Option<f64>; 11] = [None; 11];
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let slot = KEYS.iter().position(|k| *k == key).ok_or_else(|| Error::Config {
                line: line_no,
                reason: format!("unknown key `{key}`"),
            })?;
            let parsed: f64 = value.trim().parse().map_err(|_| Error::Config {
                line: line_no,
                reason: format!("`{}` is not a number", value.trim()),
            })?;
            if values[slot].replace(parsed).is_some() {
                return Err(Error::Config {
                    line: line_no,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        let get = |i: usize| {
            values[i].ok_or_else(|| Error::Config {
                line: 0,
                reason: format!("missing key `{}`", KEYS[i]),
            })
        };
        let p = PhysicalParams {
            t0: get(0)?,
            t1: get(1)?,
            depth_h: get(2)?,
            length_l: get(3)?,
            mu_x: get(4)?,
            mu_z: get(5)?,
            kappa_x: get(6)?,
            kappa_z: get(7)?,
            rho0: get(8)?,
            beta: get(9)?,
            g: get(10)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_config_string(&self) -> String {
        format!(
            "t0 = {}\nt1 = {}\ndepth_h = {}\nlength_l = {}\nmu_x = {}\nmu_z = {}\n\
             kappa_x = {}\nkappa_z = {}\nrho0 = {}\nbeta = {}\ng = {}\n",
            self.t0,
            self.t1,
            self.depth_h,
            self.length_l,
            self.mu_x,
            self.mu_z,
            self.kappa_x,
            self.kappa_z,
            self.rho0,
            self.beta,
            self.g
        )
    }
}

/// Dimensionless groups of the perturbation system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub pr_x: f64,
    pub pr_z: f64,
    pub kappa_a: f64,
    /// `pr_z / pr_x`.
    pub pr_a: f64,
    /// Aspect ratio `L / H`; the horizontal period of the domain.
    pub alpha: f64,
    pub rayleigh: f64,
    /// `Sgn(T0 - T1)`: +1 heated from below, -1 heated from above, 0 isothermal.
    pub sign: i8,
}

impl DimensionlessParams {
    pub fn new(pr_x: f64, pr_z: f64, kappa_a: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("pr_x", pr_x), ("pr_z", pr_z), ("kappa_a", kappa_a), ("alpha", alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            pr_x,
            pr_z,
            kappa_a,
            pr_a: pr_z / pr_x,
            alpha,
            rayleigh: 0.0,
            sign: 1,
        })
    }

    /// Same groups at another Rayleigh number.
    pub fn with_rayleigh(mut self, rayleigh: f64) -> Self {
        self.rayleigh = rayleigh;
        self
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.sign = sign.signum();
        self
    }

    /// Coefficient of the buoyancy term in the velocity equation,
    /// `R^{|Sgn(T0-T1)|}`.
    pub fn velocity_coupling(&self) -> f64 {
        if self.sign == 0 {
            1.0
        } else {
            self.rayleigh
        }
    }

    /// Coefficient multiplying `int_0^z d_x v` in the temperature equation,
    /// `-Sgn(T0-T1) R`.
    pub fn temperature_coupling(&self) -> f64 {
        -(self.sign as f64) * self.rayleigh
    }
}

/// Maps physical inputs onto the dimensionless system.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<DimensionlessParams> {
    p.validate()?;
    let d = DimensionlessParams::new(
        p.mu_x / p.kappa_x,
        p.mu_z / p.kappa_x,
        p.kappa_z / p.kappa_x,
        p.length_l / p.depth_h,
    )?;
    let diff = p.t0 - p.t1;
    let sign = if diff > 0.0 {
        1
    } else if diff < 0.0 {
        -1
    } else {
        0
    };
    Ok(d.with_rayleigh(rayleigh_from_delta_t(diff.abs(), p)?).with_sign(sign))
}

/// `Delta T = R^2 kappa_x^2 / (H^3 rho0 g beta)`.
pub fn delta_t_from_rayleigh(rayleigh: f64, p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    if !(rayleigh.is_finite() && rayleigh >= 0.0) {
        return Err(domain("rayleigh", format!("must be non-negative, got {rayleigh}")));
    }
    Ok(rayleigh * rayleigh / p.buoyancy_scale())
}

/// `R = H sqrt(H rho0 g beta |Delta T|) / kappa_x`.
pub fn rayleigh_from_delta_t(delta_t: f64, p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    if !(delta_t.is_finite() && delta_t >= 0.0) {
        return Err(domain("delta_t", format!("must be non-negative, got {delta_t}")));
    }
    Ok(p.depth_h * (p.depth_h * p.rho0 * p.g * p.beta * delta_t).sqrt() / p.kappa_x)
}

/// Ordered from most stable to least stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    HeatedFromAbove,
    Isothermal,
    SubcriticalBelow,
    CriticalBelow,
    SupercriticalBelow,
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeTag::HeatedFromAbove => "heated-from-above",
            RegimeTag::Isothermal => "isothermal",
            RegimeTag::SubcriticalBelow => "subcritical",
            RegimeTag::CriticalBelow => "critical",
            RegimeTag::SupercriticalBelow => "supercritical",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalRegime {
    pub tag: RegimeTag,
    /// `T0 - T1 - T_c` in kelvin.
    pub margin: f64,
}

/// Classifies `T0 - T1` against the critical difference `t_c`, treating
/// `|T0 - T1 - t_c| <= tol * t_c` as critical.
pub fn classify_regime(p: &PhysicalParams, t_c: f64, tol: f64) -> Result<ThermalRegime> {
    if !(t_c.is_finite() && t_c > 0.0) {
        return Err(domain("t_c", format!("must be positive, got {t_c}")));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(domain("tol", format!("must be non-negative, got {tol}")));
    }
    let diff = p.t0 - p.t1;
    let tag = if diff < 0.0 {
        RegimeTag::HeatedFromAbove
    } else if diff == 0.0 {
        RegimeTag::Isothermal
    } else if (diff - t_c).abs() <= tol * t_c {
        RegimeTag::CriticalBelow
    } else if diff < t_c {
        RegimeTag::SubcriticalBelow
    } else {
        RegimeTag::SupercriticalBelow
    };
    Ok(ThermalRegime {
        tag,
        margin: diff - t_c,
    })
}
