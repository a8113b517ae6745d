use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{critical_search, eigenvalues, Branch, CriticalPoint, ModeIndex};
use crate::error::{domain, Result};
use crate::params::DimensionlessParams;

/// Relative band around `R_c` treated as the critical case, and the absolute
/// band (scaled by the mode's trace) in which a rate counts as neutral.
const CRITICAL_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRate {
    pub mode: ModeIndex,
    pub branch: Branch,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    /// The enumerated spectrum follows the expected pattern.
    Consistent,
    /// Offending mode and a description of the violated expectation.
    Violation(ModeRate, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeReport {
    pub rayleigh: f64,
    pub critical: CriticalPoint,
    /// Every enumerated rate, ordered by `(m, n)` then branch.
    pub rates: Vec<ModeRate>,
    /// Rates with `beta > 0`, `m >= 0` only (one per physical pair).
    pub positive: Vec<ModeRate>,
    /// Rates with `|beta|` inside the neutral band, `m >= 0` only.
    pub neutral: Vec<ModeRate>,
    /// Largest rate over the enumeration.
    pub leading: ModeRate,
    pub verdict: Verdict,
}

/// Enumerates `beta_{+,-}(m, n)` for `|m| <= m_max`, `1 <= n <= n_max` and
/// checks the exchange-of-stabilities pattern at Rayleigh number `r`.
pub fn exchange_of_stabilities_report(
    r: f64,
    d: &DimensionlessParams,
    m_max: i64,
    n_max: u32,
) -> Result<ExchangeReport> {
    if m_max < 1 || n_max < 1 {
        return Err(domain("bounds", "m_max and n_max must be at least 1"));
    }
    let critical = critical_search(d, m_max)?;
    let modes: Vec<ModeIndex> = (-m_max..=m_max)
        .flat_map(|m| (1..=n_max).map(move |n| ModeIndex { m, n }))
        .collect();
    let rates: Vec<ModeRate> = modes
        .par_iter()
        .map(|&mode| {
            let e = eigenvalues(mode, r, d);
            [
                ModeRate {
                    mode,
                    branch: Branch::Plus,
                    beta: e.beta_plus,
                },
                ModeRate {
                    mode,
                    branch: Branch::Minus,
                    beta: e.beta_minus,
                },
            ]
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let tol = |rate: &ModeRate| {
        let e = eigenvalues(rate.mode, r, d);
        CRITICAL_BAND * 2.0 * e.big_a
    };
    let leading = *rates
        .iter()
        .fold(&rates[0], |best, x| if x.beta > best.beta { x } else { best });
    let physical = |x: &&ModeRate| x.mode.m >= 0;
    let positive: Vec<ModeRate> = rates
        .iter()
        .filter(physical)
        .filter(|x| x.beta > tol(x))
        .copied()
        .collect();
    let neutral: Vec<ModeRate> = rates
        .iter()
        .filter(physical)
        .filter(|x| x.beta.abs() <= tol(x))
        .copied()
        .collect();
    let rel = (r - critical.r_c) / critical.r_c;
    let is_critical_mode = |x: &ModeRate| x.mode.m == critical.m_c && x.mode.n == 1 && x.branch == Branch::Plus;
    let verdict = if rel.abs() <= CRITICAL_BAND {
        let bad = rates.iter().find(|x| {
            let pair = x.mode.m.abs() == critical.m_c && x.mode.n == 1 && x.branch == Branch::Plus;
            if pair {
                x.beta.abs() > tol(x)
            } else {
                x.beta >= -tol(x)
            }
        });
        match bad {
            Some(bad) => Verdict::Violation(
                *bad,
                "expected a single neutral pair (m_c, 1, +) with all other rates negative".into(),
            ),
            None => Verdict::Consistent,
        }
    } else if rel < 0.0 {
        match rates.iter().find(|x| x.beta >= 0.0) {
            Some(bad) => Verdict::Violation(*bad, "non-negative rate below R_c".into()),
            None => Verdict::Consistent,
        }
    } else {
        match rates.iter().find(|x| is_critical_mode(x)) {
            Some(x) if x.beta <= 0.0 => Verdict::Violation(*x, "critical mode not growing above R_c".into()),
            _ => Verdict::Consistent,
        }
    };
    Ok(ExchangeReport {
        rayleigh: r,
        critical,
        rates,
        positive,
        neutral,
        leading,
        verdict,
    })
}
