//! Reproducible experiments built on the spectral, reduction and simulation
//! modules, with their reports and on-disk outputs.
//!
//! Each experiment pairs every measured quantity with a prediction and a
//! tolerance in a [`Check`]; a [`RunReport`] passes when all its checks do.
//! [`write_outputs`] persists the time series and tables as CSV, plot scripts
//! for gnuplot, and one JSON manifest per report.

mod experiments;
mod output;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dns::{Diagnostics, SolverConfig};
use crate::error::{domain, Error, Result};
use crate::params::{DimensionlessParams, PhysicalParams};
use crate::spectrum::CriticalPoint;

pub use experiments::{
    run_cell_figure, run_critical_decay, run_ring_attractor, run_subcritical_decay, run_supercritical_escape,
};
pub use output::{write_outputs, DT_RULE};
pub use sweep::{run_mc_sweep, SweepAxis, SweepGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SubcriticalDecay,
    CriticalDecay,
    SupercriticalEscape,
    RingAttractor,
    CellFigure,
    McSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::SubcriticalDecay,
        ExperimentKind::CriticalDecay,
        ExperimentKind::SupercriticalEscape,
        ExperimentKind::RingAttractor,
        ExperimentKind::CellFigure,
        ExperimentKind::McSweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SubcriticalDecay => "subcritical_decay",
            ExperimentKind::CriticalDecay => "critical_decay",
            ExperimentKind::SupercriticalEscape => "supercritical_escape",
            ExperimentKind::RingAttractor => "ring_attractor",
            ExperimentKind::CellFigure => "cell_figure",
            ExperimentKind::McSweep => "mc_sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| domain("kind", format!("unknown experiment '{s}'")))
    }
}

/// Initial data of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitKind {
    /// `delta (cos(angle) psi_1 + sin(angle) psi_2)` from the critical mode.
    Eigenmode { delta: f64, angle: f64 },
    /// Random admissible data of the given L² norm.
    Random { amplitude: f64 },
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Dimensionless groups; the Rayleigh number is replaced by
    /// `rayleigh_factor * R_c` (or 0 when `sign = 0`).
    pub params: DimensionlessParams,
    /// Optional dimensional inputs, echoed and used for dimensional scales.
    pub physical: Option<PhysicalParams>,
    pub rayleigh_factor: f64,
    pub solver: SolverConfig,
    /// Replace `solver.dt` by [`SolverConfig::recommended_dt`], capped by half
    /// the advective limit of the initial state.
    pub auto_dt: bool,
    pub init: InitKind,
    /// Seeds of independent runs (ring experiment); the first is used elsewhere.
    pub seeds: Vec<u64>,
    /// Escape threshold for the supercritical experiment.
    pub epsilon: f64,
    /// Main relative tolerance of the experiment.
    pub tolerance: f64,
    /// Fraction of the run excluded as transient from fits and monotonicity checks.
    pub transient: f64,
    /// Upper bound of the critical-wavenumber search.
    pub m_max: i64,
    pub sweep: Option<SweepGrid>,
}

impl ExperimentSpec {
    fn base(kind: ExperimentKind, params: DimensionlessParams) -> Self {
        Self {
            kind,
            params,
            physical: None,
            rayleigh_factor: 1.0,
            solver: SolverConfig::default(),
            auto_dt: true,
            init: InitKind::Eigenmode {
                delta: 1e-6,
                angle: 0.0,
            },
            seeds: vec![1],
            epsilon: 1e-5,
            tolerance: 0.01,
            transient: 0.1,
            m_max: 256,
            sweep: None,
        }
    }

    fn solver(modes_x: usize, modes_z: usize, t_end: f64, diag_every: usize) -> SolverConfig {
        SolverConfig {
            modes_x,
            modes_z,
            t_end,
            diag_every,
            ..SolverConfig::default()
        }
    }

    /// `R = 0.5 R_c`, 64 x 32 modes, eigenmode data of size `1e-6`, 1% rate tolerance.
    pub fn subcritical(params: DimensionlessParams) -> Self {
        Self {
            rayleigh_factor: 0.5,
            solver: Self::solver(64, 32, 1.0, 10),
            ..Self::base(ExperimentKind::SubcriticalDecay, params)
        }
    }

    /// `R = R_c`, 12 x 12 modes, eigenmode data of size 1, horizon `t = 60`;
    /// monotonicity is checked after the first 1% of the run.
    pub fn critical(params: DimensionlessParams) -> Self {
        Self {
            rayleigh_factor: 1.0,
            solver: Self::solver(12, 12, 60.0, 5),
            init: InitKind::Eigenmode { delta: 1.0, angle: 0.0 },
            tolerance: 0.5,
            transient: 0.01,
            ..Self::base(ExperimentKind::CriticalDecay, params)
        }
    }

    /// `R = 1.1 R_c`, `delta = 1e-8`, `epsilon = 1e-5`, 10% tolerance. A zero
    /// `t_end` means twice the predicted escape time.
    pub fn supercritical(params: DimensionlessParams) -> Self {
        Self {
            rayleigh_factor: 1.1,
            solver: Self::solver(32, 16, 0.0, 1),
            init: InitKind::Eigenmode {
                delta: 1e-8,
                angle: 0.0,
            },
            epsilon: 1e-5,
            tolerance: 0.1,
            ..Self::base(ExperimentKind::SupercriticalEscape, params)
        }
    }

    /// `R = 1.01 R_c`, three random seeds of size `1e-2`, 12 x 12 modes,
    /// horizon `t = 150`, 15% radius tolerance.
    pub fn ring(params: DimensionlessParams) -> Self {
        Self {
            rayleigh_factor: 1.01,
            solver: Self::solver(12, 12, 150.0, 100),
            init: InitKind::Random { amplitude: 1e-2 },
            seeds: vec![1, 2, 3],
            tolerance: 0.15,
            transient: 0.8,
            ..Self::base(ExperimentKind::RingAttractor, params)
        }
    }

    /// Leading-order states at four ring points for `R = 1.01 R_c`.
    pub fn cell_figure(params: DimensionlessParams) -> Self {
        Self {
            rayleigh_factor: 1.01,
            ..Self::base(ExperimentKind::CellFigure, params)
        }
    }

    pub fn mc_sweep(grid: SweepGrid) -> Self {
        let params = DimensionlessParams::new(1.0, 1.0, 1.0, 1.0).expect("unit groups are valid");
        Self {
            sweep: Some(grid),
            ..Self::base(ExperimentKind::McSweep, params)
        }
    }

    /// Default specification of `kind` for the given groups.
    pub fn for_kind(kind: ExperimentKind, params: DimensionlessParams) -> Self {
        match kind {
            ExperimentKind::SubcriticalDecay => Self::subcritical(params),
            ExperimentKind::CriticalDecay => Self::critical(params),
            ExperimentKind::SupercriticalEscape => Self::supercritical(params),
            ExperimentKind::RingAttractor => Self::ring(params),
            ExperimentKind::CellFigure => Self::cell_figure(params),
            ExperimentKind::McSweep => Self::mc_sweep(SweepGrid::around(&params)),
        }
    }

    pub fn with_physical(mut self, p: PhysicalParams) -> Self {
        self.physical = Some(p);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(domain("tolerance", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.transient) {
            return Err(domain("transient", "must lie in [0, 1)"));
        }
        if !(self.rayleigh_factor >= 0.0 && self.rayleigh_factor.is_finite()) {
            return Err(domain("rayleigh_factor", "must be finite and non-negative"));
        }
        if self.m_max < 1 {
            return Err(domain("m_max", "must be at least 1"));
        }
        match self.init {
            InitKind::Eigenmode { delta, .. } if !(delta > 0.0) => return Err(domain("delta", "must be positive")),
            InitKind::Random { amplitude } if !(amplitude > 0.0) => {
                return Err(domain("amplitude", "must be positive"))
            }
            _ => {}
        }
        match self.kind {
            ExperimentKind::RingAttractor if self.seeds.is_empty() => {
                Err(domain("seeds", "the ring experiment needs at least one seed"))
            }
            ExperimentKind::SupercriticalEscape if !(self.epsilon > 0.0) => Err(domain("epsilon", "must be positive")),
            ExperimentKind::McSweep if self.sweep.is_none() => {
                Err(domain("sweep", "the sweep experiment needs a grid"))
            }
            _ => Ok(()),
        }
    }
}

/// One measured quantity against its prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub predicted: f64,
    pub tolerance: f64,
    /// How `tolerance` is applied.
    pub rule: CheckRule,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckRule {
    /// `|measured / predicted - 1| <= tolerance`.
    Relative,
    /// `|measured - predicted| <= tolerance`.
    Absolute,
    /// `measured <= predicted + tolerance`.
    AtMost,
    /// `measured >= predicted - tolerance`.
    AtLeast,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, predicted: f64, tolerance: f64, rule: CheckRule) -> Self {
        let pass = measured.is_finite()
            && match rule {
                CheckRule::Relative => (measured / predicted - 1.0).abs() <= tolerance,
                CheckRule::Absolute => (measured - predicted).abs() <= tolerance,
                CheckRule::AtMost => measured <= predicted + tolerance,
                CheckRule::AtLeast => measured >= predicted - tolerance,
            };
        Self {
            name: name.into(),
            measured,
            predicted,
            tolerance,
            rule,
            pass,
        }
    }

    pub fn relative(name: impl Into<String>, measured: f64, predicted: f64, tolerance: f64) -> Self {
        Self::new(name, measured, predicted, tolerance, CheckRule::Relative)
    }

    pub fn absolute(name: impl Into<String>, measured: f64, predicted: f64, tolerance: f64) -> Self {
        Self::new(name, measured, predicted, tolerance, CheckRule::Absolute)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, 0.0, CheckRule::AtMost)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, 0.0, CheckRule::AtLeast)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rule = match self.rule {
            CheckRule::Relative => format!("rel tol {:e}", self.tolerance),
            CheckRule::Absolute => format!("abs tol {:e}", self.tolerance),
            CheckRule::AtMost => "at most".to_string(),
            CheckRule::AtLeast => "at least".to_string(),
        };
        write!(
            f,
            "{} {}: measured {:.6e}, predicted {:.6e} ({rule})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.predicted
        )
    }
}

/// A CSV table carried by a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A gnuplot script; `{csv}` placeholders are replaced by the file name of the
/// table with the same name when written.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotScript {
    pub name: String,
    pub table: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub spec: ExperimentSpec,
    /// The Rayleigh number actually simulated.
    pub rayleigh: f64,
    pub critical: Option<CriticalPoint>,
    /// Time step actually used.
    pub dt: Option<f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
    pub pass: bool,
    #[serde(skip)]
    pub series: Vec<(String, Vec<Diagnostics>)>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub plots: Vec<PlotScript>,
}

impl RunReport {
    fn new(spec: &ExperimentSpec) -> Self {
        Self {
            kind: spec.kind,
            spec: spec.clone(),
            rayleigh: spec.params.rayleigh,
            critical: None,
            dt: None,
            checks: Vec::new(),
            notes: Vec::new(),
            wall_time_s: 0.0,
            pass: false,
            series: Vec::new(),
            tables: Vec::new(),
            plots: Vec::new(),
        }
    }

    fn finish(mut self, started: std::time::Instant) -> Self {
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self.wall_time_s = started.elapsed().as_secs_f64();
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One line per check followed by the notes.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} [{}] R = {:.6e}, {:.2} s\n",
            self.kind,
            if self.pass { "PASS" } else { "FAIL" },
            self.rayleigh,
            self.wall_time_s
        );
        for c in &self.checks {
            s.push_str(&format!("  {c}\n"));
        }
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        s
    }
}

/// Runs the experiment named by `spec.kind`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::SubcriticalDecay => run_subcritical_decay(spec),
        ExperimentKind::CriticalDecay => run_critical_decay(spec),
        ExperimentKind::SupercriticalEscape => run_supercritical_escape(spec),
        ExperimentKind::RingAttractor => run_ring_attractor(spec),
        ExperimentKind::CellFigure => run_cell_figure(spec),
        ExperimentKind::McSweep => run_mc_sweep(spec),
    }
}

/// Published worked-example values `(m_c, R_c, T_c)`.
pub const PUBLISHED_EXAMPLE: (i64, f64, f64) = (2, 41.4392, 14.6021);

/// The physical inputs of the published worked example.
pub fn published_example_physicals() -> PhysicalParams {
    PhysicalParams {
        t0: 20.0,
        t1: 5.3979,
        depth_h: 1000.0,
        length_l: 50000.0,
        mu_x: 1e4,
        mu_z: 10.0,
        kappa_x: 100.0,
        kappa_z: 1.0,
        rho0: 1.2,
        beta: 1e-4,
        g: 9.8,
    }
}

/// A discrepancy note when `p` carries the published example's material and
/// geometric inputs and the computed critical point differs from the printed one.
pub fn example_discrepancy(p: &PhysicalParams, cp: &CriticalPoint) -> Option<String> {
    let e = published_example_physicals();
    let same = [
        (p.depth_h, e.depth_h),
        (p.length_l, e.length_l),
        (p.mu_x, e.mu_x),
        (p.mu_z, e.mu_z),
        (p.kappa_x, e.kappa_x),
        (p.kappa_z, e.kappa_z),
        (p.rho0, e.rho0),
        (p.beta, e.beta),
        (p.g, e.g),
    ]
    .iter()
    .all(|(a, b)| ((a - b) / b).abs() < 1e-12);
    let (m_pub, r_pub, t_pub) = PUBLISHED_EXAMPLE;
    if !same || (cp.m_c == m_pub && ((cp.r_c - r_pub) / r_pub).abs() < 1e-4) {
        return None;
    }
    Some(format!(
        "published example lists m_c = {m_pub}, R_c = {r_pub}, T_c = {t_pub}; \
         the stated inputs give m_c = {}, R_c = {:.6}, T_c = {}. The published pair \
         (R_c, T_c) is consistent with the R <-> Delta T conversion but not with the \
         wavenumber minimization for these inputs; computed values are reported.",
        cp.m_c,
        cp.r_c,
        cp.t_c.map(|t| format!("{t:.6}")).unwrap_or_else(|| "n/a".into())
    ))
}
