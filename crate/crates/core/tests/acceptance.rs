//! Acceptance criteria 1-10. Each test writes one line
//! `criterion N: PASS|FAIL | measurements | runtime (budget)` straight to
//! stderr, so the lines appear in plain `cargo test` output, and asserts the
//! outcome; 9b is reported without being asserted.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thermoflow::dns::{Simulation, SolverConfig, SpectralState, C64};
use thermoflow::harness::{
    example_discrepancy, published_example_physicals, run_experiment, ExperimentSpec, RunReport,
};
use thermoflow::manifold::{
    bifurcation_coefficient, integrate_amplitudes, oracle::manifold_oracle, ring_radius, AmplitudeState,
};
use thermoflow::params::{delta_t_from_rayleigh, nondimensionalize};
use thermoflow::spectrum::{critical_search, critical_temperature, dense_oracle_spectrum, eigenvalues, ModeIndex};
use thermoflow::{DimensionlessParams, PhysicalParams};

/// Criterion 1: closed-form versus dense Galerkin eigenvalues, absolute.
const SPECTRUM_TOL: f64 = 1e-8;
/// Criterion 2: neutrality of the critical mode and the R <-> Delta T identity.
const NEUTRAL_TOL: f64 = 1e-9;
const CONVERSION_TOL: f64 = 1e-9;
/// Criteria 3 and 4: smallest accepted observed convergence order.
const MIN_ORDER: f64 = 1.8;
/// Criterion 4: cross term "zero to round-off" when heated from above.
const CROSS_TOL: f64 = 1e-12;
/// Criterion 9: oracle versus implemented cubic coefficient; g12 and g11 - g22 size.
const L_TOL: f64 = 1e-6;
const G_TOL: f64 = 1e-12;
/// Criterion 10: RK4 against the closed-form radial solution and terminal radius.
const RK4_TOL: f64 = 1e-8;
const RING_TOL: f64 = 1e-8;

fn line(criterion: &str, pass: bool, detail: &str, started: Instant, budget: Duration) -> bool {
    let elapsed = started.elapsed();
    let in_time = elapsed <= budget;
    let ok = pass && in_time;
    report(format_args!(
        "criterion {criterion}: {} | {detail} | {:.2} s (budget {} s{})",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", exceeded" }
    ));
    ok
}

fn report(args: std::fmt::Arguments) {
    let mut err = std::io::stderr().lock();
    writeln!(err, "\n{args}").unwrap();
}

fn desk() -> DimensionlessParams {
    DimensionlessParams::new(1.0, 1.0, 1.0, 4.0).unwrap()
}

fn report_detail(r: &RunReport, names: &[&str]) -> String {
    names
        .iter()
        .filter_map(|n| r.check(n))
        .map(|c| {
            format!(
                "{} {:.6e} vs {:.6e}{}",
                c.name,
                c.measured,
                c.predicted,
                if c.pass { "" } else { " (fail)" }
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[test]
fn criterion_01_spectrum_matches_dense_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = DimensionlessParams::new(
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.2..5.0),
            rng.gen_range(1.0..6.0),
        )
        .unwrap();
        let r = rng.gen_range(0.0..60.0);
        for m in -8i64..=8 {
            let oracle = dense_oracle_spectrum(r, &d, m, 8).unwrap();
            let mut closed: Vec<f64> = (1..=8u32)
                .flat_map(|n| {
                    let e = eigenvalues(ModeIndex { m, n }, r, &d);
                    [e.beta_plus, e.beta_minus]
                })
                .collect();
            closed.sort_by(|a, b| b.total_cmp(a));
            for (o, c) in oracle.iter().zip(&closed) {
                worst = worst.max((o.re - c).abs()).max(o.im.abs());
            }
        }
    }
    let ok = line(
        "1",
        worst <= SPECTRUM_TOL,
        &format!("max |beta_oracle - beta_closed| = {worst:.3e} (tol {SPECTRUM_TOL:e}) over 50 sets, |m| <= 8, n <= 8"),
        started,
        Duration::from_secs(10),
    );
    assert!(ok);
}

fn physical_cases() -> Vec<PhysicalParams> {
    let e = published_example_physicals();
    let desk = PhysicalParams::from_config_str(include_str!("../configs/desk.cfg")).unwrap();
    let mut anisotropic = e;
    anisotropic.length_l = 7000.0;
    anisotropic.kappa_z = 3.0;
    vec![e, desk, anisotropic]
}

#[test]
fn criterion_02_critical_point_is_self_consistent() {
    let started = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    let mut noted = false;
    for p in physical_cases() {
        let d = nondimensionalize(&p).unwrap();
        let cp = critical_temperature(&p, 1000).unwrap();
        let neutral = eigenvalues(ModeIndex { m: cp.m_c, n: 1 }, cp.r_c, &d).beta_plus.abs();
        let t_c = cp.t_c.unwrap();
        let identity = cp.r_c * cp.r_c * p.kappa_x * p.kappa_x / (p.depth_h.powi(3) * p.rho0 * p.g * p.beta);
        let conv = (t_c / identity - 1.0).abs();
        pass &= neutral <= NEUTRAL_TOL && cp.transversal_slope > 0.0 && conv <= CONVERSION_TOL;
        detail.push(format!(
            "m_c {} R_c {:.6} T_c {:.6} |beta+| {neutral:.1e} slope {:.3e} conv {conv:.1e}",
            cp.m_c, cp.r_c, t_c, cp.transversal_slope
        ));
        if p == published_example_physicals() {
            noted = example_discrepancy(&p, &cp).is_some();
            let published = delta_t_from_rayleigh(41.4392, &p).unwrap();
            pass &= (published - 14.6021).abs() < 1e-3;
        }
    }
    pass &= noted;
    detail.push(format!("example discrepancy note emitted: {noted}"));
    let ok = line("2", pass, &detail.join("; "), started, Duration::from_secs(1));
    assert!(ok);
}

fn exact_mode(d: &DimensionlessParams, m: i64, n: usize, c: (C64, C64), t: f64) -> (C64, C64) {
    let k = 2.0 * PI * m as f64 / d.alpha;
    let q = n as f64 * PI;
    let a1 = d.pr_x * k * k + d.pr_z * q * q;
    let a2 = k * k + d.kappa_a * q * q;
    let ik = C64::new(0.0, k / q);
    let l = Matrix2::new(
        C64::new(-a1, 0.0),
        ik * d.velocity_coupling(),
        ik * d.temperature_coupling(),
        C64::new(-a2, 0.0),
    ) * C64::new(t, 0.0);
    let out = l.exp() * Vector2::new(c.0, c.1);
    (out[0], out[1])
}

fn linear_error(d: &DimensionlessParams, m: i64, n: usize, dt: f64, t_end: f64) -> f64 {
    let c = (C64::new(0.3, 0.1), C64::new(-0.2, 0.25));
    let mut s = SpectralState::zeros(4, 4, d.alpha).unwrap();
    let i = s.row(m);
    s.v_hat[[i, n]] = c.0;
    s.theta_hat[[i, n]] = c.1;
    s.enforce_invariants();
    let cfg = SolverConfig {
        modes_x: 4,
        modes_z: 4,
        dt,
        t_end,
        nonlinear: false,
        diag_every: 1000,
        ..SolverConfig::default()
    };
    let mut sim = Simulation::new(cfg, *d, s).unwrap();
    sim.run().unwrap();
    let (ev, et) = exact_mode(d, m, n, c, t_end);
    let out = sim.state();
    (out.v_hat[[i, n]] - ev)
        .norm()
        .hypot((out.theta_hat[[i, n]] - et).norm())
}

#[test]
fn criterion_03_linear_modes_follow_matrix_exponential() {
    let started = Instant::now();
    let r_c = critical_search(&desk(), 64).unwrap().r_c;
    let mut min_order = f64::INFINITY;
    for (factor, sign, m, n) in [
        (0.5, 1, 2, 1),
        (1.1, 1, 2, 1),
        (1.1, 1, 3, 2),
        (0.8, -1, 1, 1),
        (0.0, 0, 2, 3),
        (1.5, 1, 1, 3),
    ] {
        let d = desk().with_rayleigh(factor * r_c).with_sign(sign);
        let errs: Vec<f64> = [2e-3, 1e-3].iter().map(|&dt| linear_error(&d, m, n, dt, 0.4)).collect();
        min_order = min_order.min((errs[0] / errs[1]).log2());
    }
    let ok = line(
        "3",
        min_order >= MIN_ORDER,
        &format!("smallest observed order {min_order:.3} (need >= {MIN_ORDER}) over 6 modes and all heating signs"),
        started,
        Duration::from_secs(30),
    );
    assert!(ok);
}

fn energy_run(d: &DimensionlessParams, dt: f64) -> (f64, f64) {
    let s = SpectralState::random(3, 3, d.alpha, 0.5, 21)
        .unwrap()
        .resized(6, 6)
        .unwrap();
    let cfg = SolverConfig {
        modes_x: 6,
        modes_z: 6,
        dt,
        t_end: 0.1,
        diag_every: 1,
        ..SolverConfig::default()
    };
    let series = Simulation::new(cfg, *d, s).unwrap().run().unwrap();
    let residual = series[2..].iter().map(|x| x.energy_residual).fold(0.0, f64::max);
    let cross = series.iter().map(|x| x.cross_term.abs()).fold(0.0, f64::max);
    (residual, cross)
}

#[test]
fn criterion_04_energy_identity() {
    let started = Instant::now();
    let r_c = critical_search(&desk(), 64).unwrap().r_c;
    let d = desk().with_rayleigh(2.0 * r_c).with_sign(-1);
    let (r1, c1) = energy_run(&d, 4e-4);
    let (r2, c2) = energy_run(&d, 2e-4);
    let order = (r1 / r2).log2();
    let cross = c1.max(c2);
    let ok = line(
        "4",
        cross <= CROSS_TOL && r2 < r1 && order >= MIN_ORDER,
        &format!("max |cross| {cross:.2e} (tol {CROSS_TOL:e}); residual {r1:.3e} -> {r2:.3e}, order {order:.3}"),
        started,
        Duration::from_secs(60),
    );
    assert!(ok);
}

#[test]
fn criterion_05_subcritical_decay() {
    let started = Instant::now();
    let r = run_experiment(&ExperimentSpec::subcritical(desk())).unwrap();
    let ok = line(
        "5",
        r.pass,
        &format!(
            "64x32, R = 0.5 R_c: {}",
            report_detail(&r, &["l2_decay_rate", "l2_monotone", "h1_monotone", "h2_monotone"])
        ),
        started,
        Duration::from_secs(120),
    );
    assert!(ok, "{}", r.summary());
}

#[test]
fn criterion_06_critical_decay() {
    let started = Instant::now();
    let r = run_experiment(&ExperimentSpec::critical(desk())).unwrap();
    let ok = line(
        "6",
        r.pass,
        &format!(
            "R = R_c, horizon t = {}: {}",
            r.spec.solver.t_end,
            report_detail(&r, &["h1_non_increasing", "h1_terminal_ratio", "linear_neutral_drift"])
        ),
        started,
        Duration::from_secs(300),
    );
    assert!(ok, "{}", r.summary());
}

#[test]
fn criterion_07_supercritical_escape() {
    let started = Instant::now();
    let r = run_experiment(&ExperimentSpec::supercritical(desk())).unwrap();
    let ok = line(
        "7",
        r.pass,
        &format!(
            "R = 1.1 R_c, delta 1e-8, epsilon 1e-5: {}",
            report_detail(&r, &["escape_time", "growth_rate"])
        ),
        started,
        Duration::from_secs(120),
    );
    assert!(ok, "{}", r.summary());
}

#[test]
fn criterion_08_ring_attractor() {
    let started = Instant::now();
    let r = run_experiment(&ExperimentSpec::ring(desk())).unwrap();
    let names: Vec<String> = r.checks.iter().map(|c| c.name.clone()).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let ok = line(
        "8",
        r.pass,
        &report_detail(&r, &names),
        started,
        Duration::from_secs(600),
    );
    assert!(ok, "{}", r.summary());
}

fn manifold_cases() -> Vec<(DimensionlessParams, f64)> {
    vec![
        (DimensionlessParams::new(1.0, 1.0, 1.0, 2.0).unwrap(), 1.0),
        (DimensionlessParams::new(1.0, 1.0, 1.0, 4.0).unwrap(), 1.01),
        (DimensionlessParams::new(2.0, 0.5, 0.3, 3.3).unwrap(), 1.05),
        (DimensionlessParams::new(0.7, 1.4, 2.0, 6.0).unwrap(), 0.98),
    ]
}

#[test]
fn criterion_09_center_manifold_algebra() {
    let started = Instant::now();
    let (mut g_worst, mut l_worst, mut pub_worst): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (base, factor) in manifold_cases() {
        let r_c = critical_search(&base, 256).unwrap().r_c;
        let d = base.with_rayleigh(factor * r_c);
        let model = bifurcation_coefficient(&d, 256).unwrap();
        let o = manifold_oracle(&model, &d).unwrap();
        let scale = o.g11.l2_norm();
        g_worst = g_worst
            .max(o.g12.l2_norm() / scale)
            .max(o.g11.axpy(-1.0, &o.g22).l2_norm() / scale);
        l_worst = l_worst
            .max((o.l / model.l - 1.0).abs())
            .max((o.l_psi2 / model.l - 1.0).abs());
        pub_worst = pub_worst.max((o.l / model.l_theorem_form - 1.0).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut l_max = f64::NEG_INFINITY;
    for _ in 0..48 {
        let base = DimensionlessParams::new(
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.5..20.0),
        )
        .unwrap();
        let r_c = critical_search(&base, 256).unwrap().r_c;
        let model = bifurcation_coefficient(&base.with_rayleigh(rng.gen_range(0.9..1.1) * r_c), 256).unwrap();
        l_max = l_max.max(model.l);
    }
    let ok = line(
        "9a",
        g_worst <= G_TOL && l_worst <= L_TOL && l_max < 0.0,
        &format!(
            "|g12|, |g11 - g22| relative {g_worst:.2e} (tol {G_TOL:e}); oracle l vs implemented l {l_worst:.2e} \
             (tol {L_TOL:e}); max l over 48 sampled sets {l_max:.3e} < 0"
        ),
        started,
        Duration::from_secs(10),
    );
    let published_ok = pub_worst <= L_TOL;
    report(format_args!(
        "criterion 9b: {} | oracle l vs published closed form: relative difference {pub_worst:.4} (tol {L_TOL:e}); \
         reported, not asserted",
        if published_ok { "PASS" } else { "FAIL" }
    ));
    assert!(ok);
}

#[test]
fn criterion_10_amplitude_ode() {
    let started = Instant::now();
    let base = desk();
    let r_c = critical_search(&base, 64).unwrap().r_c;
    let model = bifurcation_coefficient(&base.with_rayleigh(1.01 * r_c), 64).unwrap();
    let (beta, l) = (model.beta, model.l);
    let exact = |r0: f64, t: f64| ((1.0 / (r0 * r0) + l / beta) * (-2.0 * beta * t).exp() - l / beta).powf(-0.5);
    let s0 = AmplitudeState::new(0.3, -0.4);
    let err = |dt: f64| {
        let traj = integrate_amplitudes(s0, &model, dt, 20.0, 1).unwrap();
        traj.samples
            .iter()
            .map(|s| (s.radius() - exact(0.5, s.t)).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let order = (e1 / e2).log2();
    let long = integrate_amplitudes(s0, &model, 0.05, 400.0, 1000).unwrap();
    let ring = ring_radius(&model).unwrap().radius();
    let terminal = (long.terminal_radius - ring).abs();
    let angle_drift = (long.terminal.angle() - s0.angle()).abs();
    let ok = line(
        "10",
        e2 <= RK4_TOL && order >= 3.5 && terminal <= RING_TOL && angle_drift < 1e-12,
        &format!(
            "max radial error {e2:.2e} at dt 0.05 (tol {RK4_TOL:e}), order {order:.2}; \
             terminal radius {:.10} vs {ring:.10} (tol {RING_TOL:e})",
            long.terminal_radius
        ),
        started,
        Duration::from_secs(1),
    );
    assert!(ok);
}
