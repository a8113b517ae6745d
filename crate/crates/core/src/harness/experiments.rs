use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use super::{Check, ExperimentSpec, InitKind, PlotScript, RunReport, Table};
use crate::dns::{
    cfl_limit, decay_rate_fit, init_from_eigenmode, init_random, Diagnostics, Simulation, SolverConfig, SpectralState,
    Transform,
};
use crate::error::{domain, Error, Result};
use crate::field::SparseField;
use crate::manifold::{
    bifurcated_state, bifurcation_coefficient, count_cells, integrate_amplitudes, ring_radius, AmplitudeState,
    ReducedModel, StreamFunction, StreamGrid,
};
use crate::params::DimensionlessParams;
use crate::spectrum::{critical_search, eigenvector, mode_eigenvalues, Branch, CriticalPoint, Eigenvector, ModeIndex};

/// Largest relative increase tolerated between consecutive samples of a
/// norm that should not grow.
pub(crate) const MONOTONE_TOL: f64 = 1e-9;

/// Grid used to sample stream functions for cell counting and correlation.
const STREAM_NX: usize = 128;
const STREAM_NZ: usize = 32;

fn setup(spec: &ExperimentSpec) -> Result<(DimensionlessParams, CriticalPoint)> {
    let base = spec.params;
    let cp = critical_search(&base.with_sign(1), spec.m_max)?;
    let r = if base.sign == 0 {
        0.0
    } else {
        spec.rayleigh_factor * cp.r_c
    };
    Ok((base.with_rayleigh(r), cp))
}

fn critical_eigenvector(d: &DimensionlessParams, cp: &CriticalPoint) -> Result<Eigenvector> {
    eigenvector(ModeIndex { m: cp.m_c, n: 1 }, Branch::Plus, d.rayleigh, d)
}

fn initial_state(
    spec: &ExperimentSpec,
    d: &DimensionlessParams,
    eig: Option<&Eigenvector>,
    seed: u64,
) -> Result<SpectralState> {
    let (m, n) = (spec.solver.modes_x, spec.solver.modes_z);
    match spec.init {
        InitKind::Eigenmode { delta, angle } => {
            let eig = eig.ok_or_else(|| domain("init", "eigenmode data needs heating from below"))?;
            init_from_eigenmode(m, n, delta, angle, eig)
        }
        InitKind::Random { amplitude } => init_random(m, n, d.alpha, amplitude, seed),
    }
}

fn solver_config(spec: &ExperimentSpec, d: &DimensionlessParams, state: &SpectralState) -> Result<SolverConfig> {
    let mut cfg = spec.solver.clone();
    if spec.auto_dt {
        cfg.dt = SolverConfig::recommended_dt(d, cfg.modes_x);
        if cfg.nonlinear {
            let mut tr = Transform::new(cfg.modes_x, cfg.modes_z, cfg.dealias)?;
            cfg.dt = cfg.dt.min(0.5 * cfl_limit(state, &mut tr));
        }
    }
    Ok(cfg)
}

/// Runs a simulation; a blow-up becomes a failing check instead of an error.
fn simulate(
    report: &mut RunReport,
    cfg: SolverConfig,
    d: DimensionlessParams,
    state: SpectralState,
    eig: Option<&Eigenvector>,
    observe: impl FnMut(&Diagnostics) -> bool,
) -> Result<Option<(Vec<Diagnostics>, SpectralState)>> {
    let mut sim = Simulation::new(cfg, d, state)?;
    if let Some(e) = eig {
        sim = sim.with_projection(e)?;
    }
    match sim.run_observed(observe) {
        Ok(series) => Ok(Some((series, sim.into_state()))),
        Err(e @ Error::BlowUp { .. }) => {
            report.checks.push(Check::at_least("completed", 0.0, 1.0));
            report.notes.push(e.to_string());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn norm_series(series: &[Diagnostics], f: impl Fn(&Diagnostics) -> f64) -> Vec<(f64, f64)> {
    series.iter().map(|x| (x.t, f(x))).collect()
}

/// Largest `(b - a) / a` over consecutive samples starting at or after `from`.
pub(crate) fn max_relative_increase(values: &[(f64, f64)], from: f64) -> f64 {
    values
        .windows(2)
        .filter(|w| w[0].0 >= from && w[0].1 > 0.0)
        .map(|w| (w[1].1 - w[0].1) / w[0].1)
        .fold(0.0, f64::max)
}

/// Largest real part of the linear spectrum over `0 <= m <= modes_x`,
/// `1 <= n <= modes_z`.
pub(crate) fn spectral_abscissa(d: &DimensionlessParams, modes_x: usize, modes_z: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for m in 0..=modes_x as i64 {
        for n in 1..=modes_z as u32 {
            for ev in mode_eigenvalues(ModeIndex { m, n }, d) {
                best = best.max(ev.re);
            }
        }
    }
    best
}

fn fit_check(
    report: &mut RunReport,
    name: &str,
    series: &[(f64, f64)],
    window: (f64, f64),
    check: impl FnOnce(f64) -> Check,
) {
    match decay_rate_fit(series, window) {
        Ok(fit) => report.checks.push(check(fit.rate)),
        Err(e) => {
            let mut c = check(f64::NAN);
            c.pass = false;
            report.checks.push(c);
            report.notes.push(format!("{name}: {e}"));
        }
    }
}

fn grid_table(name: &str, grid: &StreamGrid) -> (Table, PlotScript) {
    let mut rows = Vec::with_capacity(grid.nx * (grid.nz + 1));
    for i in 0..grid.nx {
        for j in 0..=grid.nz {
            rows.push(vec![grid.x(i), grid.z(j), grid.at(i, j)]);
        }
    }
    let table = Table {
        name: name.to_string(),
        header: vec!["x".into(), "z".into(), "psi".into()],
        rows,
    };
    let plot = PlotScript {
        name: name.to_string(),
        table: name.to_string(),
        body: grid.plot_script("{csv}", &format!("{name}.png")),
    };
    (table, plot)
}

fn norm_plot(name: &str, columns: &[(usize, &str)], log_y: bool) -> PlotScript {
    let lines: Vec<String> = columns
        .iter()
        .map(|(c, title)| format!("'{{csv}}' using 1:{c} with lines title '{title}'"))
        .collect();
    PlotScript {
        name: name.to_string(),
        table: "series".to_string(),
        body: format!(
            "set datafile separator ','\nset terminal pngcairo size 900,600\nset output '{name}.png'\n\
             set key autotitle columnhead\nset xlabel 't'\n{}plot {}\n",
            if log_y { "set logscale y\n" } else { "" },
            lines.join(", \\\n     ")
        ),
    }
}

/// Decay below onset (heated from below with `R < R_c`), heated from above,
/// or isothermal.
pub fn run_subcritical_decay(spec: &ExperimentSpec) -> Result<RunReport> {
    let started = Instant::now();
    let mut report = RunReport::new(spec);
    let (d, cp) = setup(spec)?;
    if d.sign == 1 && spec.rayleigh_factor >= 1.0 {
        return Err(domain(
            "rayleigh_factor",
            "subcritical decay needs R < R_c when heated from below",
        ));
    }
    report.rayleigh = d.rayleigh;
    report.critical = Some(cp);
    let eig = if d.sign == 1 {
        Some(critical_eigenvector(&d, &cp)?)
    } else {
        None
    };
    let state = initial_state(spec, &d, eig.as_ref(), spec.seeds[0])?;
    let cfg = solver_config(spec, &d, &state)?;
    report.dt = Some(cfg.dt);
    let t_end = cfg.t_end;
    let Some((series, _)) = simulate(&mut report, cfg, d, state, eig.as_ref(), |_| true)? else {
        return Ok(report.finish(started));
    };
    let from = spec.transient * t_end;
    let window = (from, t_end);
    let l2 = norm_series(&series, Diagnostics::l2);
    match (spec.init, &eig) {
        (InitKind::Eigenmode { .. }, Some(e)) => {
            let (beta, tol) = (e.beta, spec.tolerance);
            fit_check(&mut report, "l2_decay_rate", &l2, window, |r| {
                Check::relative("l2_decay_rate", r, beta, tol)
            });
        }
        _ if d.sign == 0 => {
            let bound = PI * PI * d.kappa_a.min(1.0) * (1.0 - spec.tolerance);
            let theta = norm_series(&series, |x| x.l2_theta);
            fit_check(&mut report, "theta_decay_rate", &theta, window, |r| {
                Check::at_least("theta_decay_rate", -r, bound)
            });
        }
        _ => {
            let gap = -spectral_abscissa(&d, spec.solver.modes_x, spec.solver.modes_z);
            let bound = gap * (1.0 - 0.1);
            fit_check(&mut report, "l2_decay_rate", &l2, window, |r| {
                Check::at_least("l2_decay_rate", -r, bound)
            });
        }
    }
    for (name, values) in [
        ("l2_monotone", l2.clone()),
        ("h1_monotone", norm_series(&series, Diagnostics::h1)),
        ("h2_monotone", norm_series(&series, Diagnostics::h2)),
    ] {
        report
            .checks
            .push(Check::at_most(name, max_relative_increase(&values, from), MONOTONE_TOL));
    }
    report.plots.push(norm_plot(
        "norms",
        &[(2, "l2_v"), (3, "l2_theta"), (4, "h1_v"), (6, "h2_v")],
        true,
    ));
    report.series.push(("series".into(), series));
    Ok(report.finish(started))
}

/// Decay exactly at onset; the horizon is `solver.t_end`.
pub fn run_critical_decay(spec: &ExperimentSpec) -> Result<RunReport> {
    let started = Instant::now();
    let mut report = RunReport::new(spec);
    if spec.params.sign != 1 || (spec.rayleigh_factor - 1.0).abs() > 1e-12 {
        return Err(domain(
            "rayleigh_factor",
            "critical decay runs at R = R_c, heated from below",
        ));
    }
    let (d, cp) = setup(spec)?;
    report.rayleigh = d.rayleigh;
    report.critical = Some(cp);
    let eig = critical_eigenvector(&d, &cp)?;
    let state = initial_state(spec, &d, Some(&eig), spec.seeds[0])?;
    let cfg = solver_config(spec, &d, &state)?;
    report.dt = Some(cfg.dt);
    let t_end = cfg.t_end;

    let mut linear_cfg = cfg.clone();
    linear_cfg.nonlinear = false;
    linear_cfg.t_end = cfg.t_end.min(5.0);
    let linear_state = init_from_eigenmode(cfg.modes_x, cfg.modes_z, 1e-3, 0.0, &eig)?;
    if let Some((lin, _)) = simulate(&mut report, linear_cfg, d, linear_state, None, |_| true)? {
        let drift = lin
            .iter()
            .map(|x| (x.l2() / lin[0].l2() - 1.0).abs())
            .fold(0.0, f64::max);
        report.checks.push(Check::at_most("linear_neutral_drift", drift, 1e-6));
    }

    let Some((series, terminal)) = simulate(&mut report, cfg, d, state, Some(&eig), |_| true)? else {
        return Ok(report.finish(started));
    };
    let h1 = norm_series(&series, Diagnostics::h1);
    let from = spec.transient * t_end;
    report.checks.push(Check::at_most(
        "h1_non_increasing",
        max_relative_increase(&h1, from),
        MONOTONE_TOL,
    ));
    let peak = h1
        .iter()
        .filter(|(t, _)| *t < from)
        .map(|(_, h)| *h)
        .fold(h1[0].1, f64::max);
    if peak > h1[0].1 {
        report.notes.push(format!(
            "H1 rises by {:.3e} (relative) during the transient t < {from}",
            peak / h1[0].1 - 1.0
        ));
    }
    let ratio = h1.last().map_or(f64::NAN, |l| l.1) / h1[0].1;
    report
        .checks
        .push(Check::at_most("h1_terminal_ratio", ratio, spec.tolerance));
    let compat = series.iter().map(|x| x.compat_residual).fold(0.0, f64::max);
    report.checks.push(Check::at_most("compat_residual", compat, 1e-10));
    report.checks.push(Check::absolute(
        "invariants_hold",
        f64::from(u8::from(terminal.invariants_hold())),
        1.0,
        0.0,
    ));
    report
        .plots
        .push(norm_plot("h1", &[(4, "h1_v"), (5, "h1_theta")], true));
    report.series.push(("series".into(), series));
    Ok(report.finish(started))
}

/// Time at which the L² norm first reaches `epsilon`, interpolating
/// log-linearly between samples.
pub(crate) fn crossing_time(series: &[Diagnostics], epsilon: f64) -> Option<f64> {
    let idx = series.iter().position(|x| x.l2() >= epsilon)?;
    if idx == 0 {
        return Some(series[0].t);
    }
    let (a, b) = (&series[idx - 1], &series[idx]);
    let (la, lb) = (a.l2().ln(), b.l2().ln());
    let frac = if lb > la { (epsilon.ln() - la) / (lb - la) } else { 1.0 };
    Some(a.t + frac * (b.t - a.t))
}

/// Escape from `delta` times the unit critical eigenmode above onset.
pub fn run_supercritical_escape(spec: &ExperimentSpec) -> Result<RunReport> {
    let started = Instant::now();
    let mut report = RunReport::new(spec);
    if spec.params.sign != 1 || spec.rayleigh_factor <= 1.0 {
        return Err(domain("rayleigh_factor", "escape needs R > R_c, heated from below"));
    }
    let InitKind::Eigenmode { delta, .. } = spec.init else {
        return Err(domain("init", "escape starts from the critical eigenmode"));
    };
    let epsilon = spec.epsilon;
    if delta > epsilon {
        return Err(domain("delta", "must not exceed epsilon"));
    }
    let (d, cp) = setup(spec)?;
    report.rayleigh = d.rayleigh;
    report.critical = Some(cp);
    let eig = critical_eigenvector(&d, &cp)?;
    let beta = eig.beta;
    let t_pred = (epsilon / delta).ln() / beta;
    if epsilon > 1e3 * delta {
        report
            .notes
            .push(format!("epsilon / delta = {:e} exceeds 1e3", epsilon / delta));
    }
    let model = bifurcation_coefficient(&d, spec.m_max)?;
    if let Ok(r) = ring_radius(&model) {
        if epsilon >= r.radius() {
            report.notes.push(format!(
                "epsilon {epsilon:e} is not below the ring radius {:e}",
                r.radius()
            ));
        }
    }
    let state = initial_state(spec, &d, Some(&eig), spec.seeds[0])?;
    let mut cfg = solver_config(spec, &d, &state)?;
    if cfg.t_end <= 0.0 {
        cfg.t_end = (2.0 * t_pred).max(1.0);
    }
    report.dt = Some(cfg.dt);
    let t_end = cfg.t_end;
    let Some((series, _)) = simulate(&mut report, cfg, d, state, Some(&eig), |x| x.l2() < epsilon)? else {
        return Ok(report.finish(started));
    };
    match crossing_time(&series, epsilon) {
        Some(t) if t_pred > 0.0 => report
            .checks
            .push(Check::relative("escape_time", t, t_pred, spec.tolerance)),
        Some(t) => report.checks.push(Check::absolute("escape_time", t, 0.0, 0.0)),
        None => {
            let mut c = Check::relative("escape_time", t_end, t_pred, spec.tolerance);
            c.pass = false;
            report.checks.push(c);
            report
                .notes
                .push(format!("L2 norm stayed below {epsilon:e} up to t = {t_end}"));
        }
    }
    if t_pred > 0.0 {
        let l2 = norm_series(&series, Diagnostics::l2);
        fit_check(&mut report, "growth_rate", &l2, (0.1 * t_pred, 0.9 * t_pred), |r| {
            Check::relative("growth_rate", r, beta, 0.01)
        });
    }
    report
        .plots
        .push(norm_plot("l2", &[(2, "l2_v"), (3, "l2_theta")], true));
    report.series.push(("series".into(), series));
    Ok(report.finish(started))
}

struct SeedOutcome {
    seed: u64,
    radius: f64,
    angle: f64,
    initial: (f64, f64),
    cells: usize,
    correlation: f64,
    balance: f64,
    grid: StreamGrid,
    series: Vec<Diagnostics>,
}

fn ring_seed(
    spec: &ExperimentSpec,
    d: &DimensionlessParams,
    model: &ReducedModel,
    ring: f64,
    seed: u64,
) -> Result<std::result::Result<SeedOutcome, String>> {
    let eig = &model.eigenvector;
    let state = initial_state(spec, d, Some(eig), seed)?;
    let cfg = solver_config(spec, d, &state)?;
    let t_end = cfg.t_end;
    let mut sim = Simulation::new(cfg, *d, state)?.with_projection(eig)?;
    let series = match sim.run() {
        Ok(s) => s,
        Err(e @ Error::BlowUp { .. }) => return Ok(Err(format!("seed {seed}: {e}"))),
        Err(e) => return Err(e),
    };
    let from = (1.0 - 0.2) * t_end;
    let tail: Vec<f64> = series
        .iter()
        .filter(|x| x.t >= from)
        .map(Diagnostics::amplitude_radius)
        .collect();
    let radius = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
    let last = *series.last().expect("a run records at least one sample");
    let angle = last.x2.atan2(last.x1);
    let grid = StreamFunction::from_field(&SparseField::from_state(sim.state())).sample(STREAM_NX, STREAM_NZ)?;
    let cells = count_cells(&grid)?;
    let theory = bifurcated_state(ring * angle.cos(), ring * angle.sin(), model, spec.physical.as_ref())?;
    let theory_grid = StreamFunction::from_field(&theory.field).sample(STREAM_NX, STREAM_NZ)?;
    let correlation = grid.correlation(&theory_grid)?;
    let balance = if last.dissipation_v > 0.0 {
        last.steady_balance / last.dissipation_v
    } else {
        f64::INFINITY
    };
    Ok(Ok(SeedOutcome {
        seed,
        radius,
        angle,
        initial: (series[0].x1, series[0].x2),
        cells,
        correlation,
        balance,
        grid,
        series,
    }))
}

/// Independent runs from random small data just above onset; each should
/// settle on the ring of steady states at its own angle.
pub fn run_ring_attractor(spec: &ExperimentSpec) -> Result<RunReport> {
    let started = Instant::now();
    let mut report = RunReport::new(spec);
    let eps = spec.rayleigh_factor - 1.0;
    if spec.params.sign != 1 || !(eps > 0.0 && eps <= 0.05 + 1e-12) {
        return Err(domain(
            "rayleigh_factor",
            "the ring experiment needs R / R_c in (1, 1.05]",
        ));
    }
    let (d, cp) = setup(spec)?;
    report.rayleigh = d.rayleigh;
    report.critical = Some(cp);
    let model = bifurcation_coefficient(&d, spec.m_max)?;
    let ring = ring_radius(&model)?.radius();
    let outcomes: Vec<_> = spec
        .seeds
        .par_iter()
        .map(|&seed| ring_seed(spec, &d, &model, ring, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut done = Vec::new();
    for o in outcomes {
        match o {
            Ok(o) => done.push(o),
            Err(note) => {
                report.checks.push(Check::at_least("completed", 0.0, 1.0));
                report.notes.push(note);
            }
        }
    }
    let first_cfg = solver_config(
        spec,
        &d,
        &initial_state(spec, &d, Some(&model.eigenvector), spec.seeds[0])?,
    )?;
    report.dt = Some(first_cfg.dt);
    let cells_pred = 2.0 * model.m_c as f64;
    for o in &done {
        let s = o.seed;
        report.checks.push(Check::relative(
            format!("radius_seed{s}"),
            o.radius,
            ring,
            spec.tolerance,
        ));
        report.checks.push(Check::absolute(
            format!("cells_seed{s}"),
            o.cells as f64,
            cells_pred,
            0.0,
        ));
        report
            .checks
            .push(Check::at_least(format!("correlation_seed{s}"), o.correlation, 0.9));
        report
            .checks
            .push(Check::at_most(format!("steady_balance_seed{s}"), o.balance, 1e-3));
        report
            .notes
            .push(format!("seed {s}: radius {:.6}, angle {:.6}", o.radius, o.angle));
    }
    if done.len() > 1 {
        let mut spread: f64 = 0.0;
        let mut separation = f64::INFINITY;
        for (i, a) in done.iter().enumerate() {
            for b in &done[i + 1..] {
                spread = spread
                    .max((a.radius / b.radius - 1.0).abs())
                    .max((b.radius / a.radius - 1.0).abs());
                let gap = (a.angle - b.angle).rem_euclid(2.0 * PI);
                separation = separation.min(gap.min(2.0 * PI - gap));
            }
        }
        report
            .checks
            .push(Check::at_most("radius_pairwise_spread", spread, 0.05));
        report
            .checks
            .push(Check::at_least("angle_separation", separation, 1e-2));
    }
    if let Some(o) = done.first() {
        let (x1, x2) = if o.initial.0.hypot(o.initial.1) > 0.0 {
            o.initial
        } else {
            (1e-3, 0.0)
        };
        let traj = integrate_amplitudes(
            AmplitudeState::new(x1, x2),
            &model,
            1e-2,
            first_cfg.t_end.max(200.0),
            1000,
        )?;
        report.checks.push(Check::relative(
            "ode_surrogate_radius",
            traj.terminal_radius,
            ring,
            1e-6,
        ));
        let (table, plot) = grid_table("psi_dns", &o.grid);
        report.tables.push(table);
        report.plots.push(plot);
    }
    report
        .plots
        .push(norm_plot("amplitudes", &[(8, "x1"), (9, "x2")], false));
    for o in done {
        report.series.push((format!("seed{}", o.seed), o.series));
    }
    Ok(report.finish(started))
}

/// Leading-order bifurcated states at four points of the ring, sampled for
/// plotting, with their cell counts.
pub fn run_cell_figure(spec: &ExperimentSpec) -> Result<RunReport> {
    let started = Instant::now();
    let mut report = RunReport::new(spec);
    if spec.params.sign != 1 || spec.rayleigh_factor <= 1.0 {
        return Err(domain(
            "rayleigh_factor",
            "bifurcated states exist for R > R_c, heated from below",
        ));
    }
    let (d, cp) = setup(spec)?;
    report.rayleigh = d.rayleigh;
    report.critical = Some(cp);
    let model = bifurcation_coefficient(&d, spec.m_max)?;
    let ring = ring_radius(&model)?.radius();
    let cells_pred = 2.0 * model.m_c as f64;
    let mut counts = Vec::new();
    for i in 0..4 {
        let phi = 0.5 * PI * i as f64;
        let sol = bifurcated_state(ring * phi.cos(), ring * phi.sin(), &model, spec.physical.as_ref())?;
        let grid = StreamFunction::from_field(&sol.field).sample(STREAM_NX, STREAM_NZ)?;
        let cells = count_cells(&grid)?;
        counts.push(cells);
        report.checks.push(Check::absolute(
            format!("cells_s{}", i + 1),
            cells as f64,
            cells_pred,
            0.0,
        ));
        let (table, plot) = grid_table(&format!("psi_s{}", i + 1), &grid);
        report.tables.push(table);
        report.plots.push(plot);
    }
    let lo = counts.iter().min().copied().unwrap_or(0);
    let hi = counts.iter().max().copied().unwrap_or(0);
    report
        .checks
        .push(Check::absolute("counts_identical", (hi - lo) as f64, 0.0, 0.0));
    report.notes.push(format!("ring radius {ring:.6}, m_c = {}", model.m_c));
    Ok(report.finish(started))
}
