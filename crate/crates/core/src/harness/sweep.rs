use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Check, ExperimentSpec, PlotScript, RunReport, Table};
use crate::error::{domain, Error, Result};
use crate::params::DimensionlessParams;
use crate::spectrum::{critical_search, SearchStatus};

/// Evenly spaced values `start..=end` with `steps` points (`start` alone for one point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        let axis = Self { start, end, steps };
        axis.validate()?;
        Ok(axis)
    }

    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            end: value,
            steps: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(domain("steps", "a sweep axis needs at least one point"));
        }
        if !(self.start > 0.0 && self.end > 0.0 && self.start.is_finite() && self.end.is_finite()) {
            return Err(domain("sweep", "grid bounds must be positive and finite"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + h * i as f64).collect()
    }
}

/// Parses `START:END:STEPS`.
impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || domain("sweep", format!("expected START:END:STEPS, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = parts[0].trim().parse().map_err(|_| bad())?;
        let end = parts[1].trim().parse().map_err(|_| bad())?;
        let steps = parts[2].trim().parse().map_err(|_| bad())?;
        Self::new(start, end, steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub alpha: SweepAxis,
    pub pr_a: SweepAxis,
    pub kappa_a: f64,
}

impl SweepGrid {
    /// A 5 x 5 grid spanning a factor of two either side of `d`.
    pub fn around(d: &DimensionlessParams) -> Self {
        Self {
            alpha: SweepAxis {
                start: 0.5 * d.alpha,
                end: 2.0 * d.alpha,
                steps: 5,
            },
            pr_a: SweepAxis {
                start: 0.5 * d.pr_a,
                end: 2.0 * d.pr_a,
                steps: 5,
            },
            kappa_a: d.kappa_a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        self.pr_a.validate()?;
        if !(self.kappa_a > 0.0 && self.kappa_a.is_finite()) {
            return Err(domain("kappa_a", "must be positive and finite"));
        }
        Ok(())
    }
}

/// Fraction of adjacent pairs along `axis` (0 for alpha, 1 for pr_a) whose
/// `m_c` does not decrease as the axis value increases; `None` without pairs.
fn trend_fraction(rows: &[Vec<f64>], n_alpha: usize, n_pra: usize, along_alpha: bool) -> Option<f64> {
    let at = |i: usize, j: usize| rows[i * n_pra + j][3];
    let (mut ok, mut total) = (0usize, 0usize);
    if along_alpha {
        for j in 0..n_pra {
            for i in 1..n_alpha {
                total += 1;
                ok += usize::from(at(i, j) >= at(i - 1, j));
            }
        }
    } else {
        for i in 0..n_alpha {
            for j in 1..n_pra {
                total += 1;
                ok += usize::from(at(i, j) >= at(i, j - 1));
            }
        }
    }
    (total > 0).then(|| ok as f64 / total as f64)
}

/// Critical wavenumber over a grid in `(alpha, Pr_a)` at fixed `kappa_a`
/// with `Pr_x = 1`.
pub fn run_mc_sweep(spec: &ExperimentSpec) -> Result<RunReport> {
    let started = Instant::now();
    let grid = spec
        .sweep
        .as_ref()
        .ok_or_else(|| domain("sweep", "the sweep experiment needs a grid"))?;
    grid.validate()?;
    let mut report = RunReport::new(spec);
    let (alphas, pras) = (grid.alpha.values(), grid.pr_a.values());
    let mut rows = Vec::with_capacity(alphas.len() * pras.len());
    let mut truncated = 0usize;
    for &alpha in &alphas {
        for &pr_a in &pras {
            let d = DimensionlessParams::new(1.0, pr_a, grid.kappa_a, alpha)?;
            let cp = critical_search(&d, spec.m_max)?;
            let flag = cp.status == SearchStatus::Truncated;
            if flag {
                truncated += 1;
                report.notes.push(format!(
                    "alpha = {alpha}, pr_a = {pr_a}: minimum on the search bound m = {}",
                    spec.m_max
                ));
            }
            rows.push(vec![
                alpha,
                pr_a,
                grid.kappa_a,
                cp.m_c as f64,
                cp.r_c,
                f64::from(u8::from(flag)),
            ]);
        }
    }
    for (name, along) in [("mc_trend_alpha", true), ("mc_trend_pr_a", false)] {
        if let Some(f) = trend_fraction(&rows, alphas.len(), pras.len(), along) {
            report.checks.push(Check::at_least(name, f, 0.5));
        }
    }
    report
        .checks
        .push(Check::absolute("truncated_points", truncated as f64, 0.0, 0.0));
    report.tables.push(Table {
        name: "mc_table".into(),
        header: ["alpha", "pr_a", "kappa_a", "m_c", "r_c", "truncated"]
            .map(String::from)
            .to_vec(),
        rows,
    });
    report.plots.push(PlotScript {
        name: "mc_map".into(),
        table: "mc_table".into(),
        body: "set datafile separator ','\nset terminal pngcairo size 900,700\nset output 'mc_map.png'\n\
               set xlabel 'alpha'\nset ylabel 'Pr_a'\nset cblabel 'm_c'\nset view map\n\
               splot '{csv}' every ::1 using 1:2:4 with points pointtype 5 pointsize 2 palette notitle\n"
            .into(),
    });
    Ok(report.finish(started))
}
