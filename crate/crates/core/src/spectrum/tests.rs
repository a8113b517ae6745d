use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use super::critical::{direct_critical_temperature, wavenumber_cost};
use super::*;
use crate::dns::state::SpectralState;
use crate::params::tests::example_physicals;
use crate::params::{delta_t_from_rayleigh, nondimensionalize, PhysicalParams};

fn unit(alpha: f64) -> DimensionlessParams {
    DimensionlessParams::new(1.0, 1.0, 1.0, alpha).unwrap()
}

fn mode(m: i64, n: u32) -> ModeIndex {
    ModeIndex::new(m, n).unwrap()
}

/// Bisection for the zero of `beta_plus(R)`, independent of the closed form.
fn neutral_by_bisection(md: ModeIndex, d: &DimensionlessParams) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while eigenvalues(md, hi, d).beta_plus < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eigenvalues(md, mid, d).beta_plus < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Direct sampling quadrature of `int_D f g` on a uniform grid.
fn grid_inner(f: &crate::field::SparseField, g: &crate::field::SparseField) -> f64 {
    let (nx, nz) = (64, 64);
    let mut sum = 0.0;
    for i in 0..nx {
        for j in 0..=nz {
            let x = f.alpha * i as f64 / nx as f64;
            let z = j as f64 / nz as f64;
            let w = if j == 0 || j == nz { 0.5 } else { 1.0 };
            let (a, b) = f.eval(x, z);
            let (c, e) = g.eval(x, z);
            sum += w * (a * c + b * e);
        }
    }
    sum * f.alpha / nx as f64 / nz as f64
}

#[test]
fn dispersion_symbolic_case() {
    for (m, n) in [(1, 1), (2, 1), (3, 2), (1, 3)] {
        let alpha = 2.0 * m as f64 / n as f64;
        let r2 = dispersion_r2(mode(m, n), &unit(alpha)).unwrap();
        assert_relative_eq!(r2, 4.0 * (n as f64).powi(4) * PI.powi(4), max_relative = 1e-12);
    }
}

#[test]
fn dispersion_is_even_and_rejects_m0() {
    let d = DimensionlessParams::new(2.0, 0.3, 0.7, 3.1).unwrap();
    for m in 1..6 {
        for n in 1..4 {
            assert_eq!(
                dispersion_r2(mode(m, n), &d).unwrap(),
                dispersion_r2(mode(-m, n), &d).unwrap()
            );
        }
    }
    assert!(matches!(
        dispersion_r2(mode(0, 1), &d),
        Err(crate::Error::NoNeutralMode)
    ));
}

#[test]
fn eigenvalues_at_zero_rayleigh_are_diffusion_rates() {
    let d = DimensionlessParams::new(2.0, 0.5, 0.1, 1.7).unwrap();
    let md = mode(3, 2);
    let a = (2.0 * PI * 3.0 / 1.7f64).powi(2);
    let q2 = (2.0 * PI).powi(2);
    let (r1, r2) = (2.0 * a + 0.5 * q2, a + 0.1 * q2);
    let e = eigenvalues(md, 0.0, &d);
    assert_relative_eq!(e.beta_plus, -r1.min(r2), max_relative = 1e-14);
    assert_relative_eq!(e.beta_minus, -r1.max(r2), max_relative = 1e-14);
}

#[test]
fn horizontally_uniform_modes_ignore_rayleigh() {
    let d = DimensionlessParams::new(2.0, 0.5, 0.1, 1.7).unwrap();
    let e0 = eigenvalues(mode(0, 2), 0.0, &d);
    let e1 = eigenvalues(mode(0, 2), 1e4, &d);
    assert_eq!(e0.beta_plus, e1.beta_plus);
    assert_eq!(e0.beta_minus, e1.beta_minus);
    assert!(e0.beta_plus < 0.0);
}

#[test]
fn critical_mode_is_neutral_at_critical_rayleigh() {
    let d = DimensionlessParams::new(1.3, 0.4, 0.6, 2.7).unwrap();
    let cp = critical_search(&d, 200).unwrap();
    let e = eigenvalues(mode(cp.m_c, 1), cp.r_c, &d);
    assert!(e.beta_plus.abs() < 1e-9, "{}", e.beta_plus);
    assert!(cp.transversal_slope > 0.0);
    assert!(cp.n1_minimal);
    assert_eq!(cp.status, SearchStatus::Interior);
    let analytic = cp.r_c * e.a / PI.powi(2) / e.big_b;
    assert_relative_eq!(cp.transversal_slope, analytic, max_relative = 1e-6);
}

#[test]
fn critical_search_simple_minimum() {
    let cp = critical_search(&unit(2.0), 50).unwrap();
    assert_eq!(cp.m_c, 1);
    assert_relative_eq!(cp.r_c, 2.0 * PI * PI, max_relative = 1e-12);
}

#[test]
fn critical_search_ties_pick_smallest_m() {
    // c1 = 4 / (Pr_a alpha^2) = 1, c2 = kappa_a alpha^2 / 4 = 4 = 4 c1
    let d = DimensionlessParams::new(1.0, 1.0, 4.0, 2.0).unwrap();
    assert_eq!(wavenumber_cost(1, &d), wavenumber_cost(2, &d));
    assert_eq!(critical_search(&d, 10).unwrap().m_c, 1);
}

#[test]
fn critical_search_flags_truncation() {
    let d = DimensionlessParams::new(1.0, 1.0, 1.0, 40.0).unwrap();
    let cp = critical_search(&d, 3).unwrap();
    assert_eq!(cp.status, SearchStatus::Truncated);
    assert_eq!(cp.m_c, 3);
    assert!(critical_search(&d, 0).is_err());
}

#[test]
fn example_inputs_match_brute_force() {
    let d = nondimensionalize(&example_physicals()).unwrap();
    let cp = critical_search(&d, 1000).unwrap();
    let (mut best_m, mut best) = (0, f64::INFINITY);
    for m in 1..=1000 {
        let m2 = (m * m) as f64;
        let a = 4.0 * PI * PI * m2 / (d.alpha * d.alpha);
        let r2 = PI * PI * (d.pr_x * a + d.pr_z * PI * PI) * (a + d.kappa_a * PI * PI) / a;
        if r2 < best {
            best = r2;
            best_m = m;
        }
    }
    assert_eq!(cp.m_c, best_m);
    assert_relative_eq!(cp.r_c * cp.r_c, best, max_relative = 1e-12);
    // The published worked example lists m_c = 2, R_c = 41.4392; the inputs give m_c = 1.
    assert_eq!(cp.m_c, 1);
    assert!((cp.r_c - 13.55).abs() < 0.01, "{}", cp.r_c);
}

#[test]
fn critical_temperature_matches_conversion() {
    let p = example_physicals();
    let cp = critical_temperature(&p, 1000).unwrap();
    let t_c = cp.t_c.unwrap();
    let conv = cp.r_c * cp.r_c * p.kappa_x.powi(2) / (p.depth_h.powi(3) * p.rho0 * p.g * p.beta);
    assert_relative_eq!(t_c, conv, max_relative = 1e-9);
    assert_relative_eq!(t_c, direct_critical_temperature(&p, cp.m_c), max_relative = 1e-9);
}

#[test]
fn critical_temperature_inverse_in_rho_beta() {
    let p = example_physicals();
    let mut q = p;
    q.rho0 *= 2.0;
    let t1 = critical_temperature(&p, 1000).unwrap().t_c.unwrap();
    let t2 = critical_temperature(&q, 1000).unwrap().t_c.unwrap();
    assert_relative_eq!(t2, 0.5 * t1, max_relative = 1e-12);
}

#[test]
fn critical_temperature_isotropic_square() {
    let p = PhysicalParams {
        t0: 1.0,
        t1: 0.0,
        depth_h: 1.0,
        length_l: 1.0,
        mu_x: 1.0,
        mu_z: 1.0,
        kappa_x: 1.0,
        kappa_z: 1.0,
        rho0: 1.0,
        beta: 1.0,
        g: 1.0,
    };
    let cp = critical_temperature(&p, 100).unwrap();
    let brute = (1..=100)
        .map(|m| {
            let a = 4.0 * PI * PI * (m * m) as f64;
            PI * PI * (a + PI * PI).powi(2) / a
        })
        .fold(f64::INFINITY, f64::min);
    assert_relative_eq!(cp.t_c.unwrap(), brute, max_relative = 1e-12);
    assert_relative_eq!(
        cp.t_c.unwrap(),
        delta_t_from_rayleigh(cp.r_c, &p).unwrap(),
        max_relative = 1e-15
    );
}

#[test]
fn eigenvector_profiles_are_orthonormal() {
    let d = DimensionlessParams::new(1.3, 0.4, 0.6, 2.7).unwrap();
    let cp = critical_search(&d, 100).unwrap();
    for r in [0.5 * cp.r_c, cp.r_c, 1.2 * cp.r_c] {
        for br in [Branch::Plus, Branch::Minus] {
            let ev = eigenvector(mode(cp.m_c, 1), br, r, &d).unwrap();
            let (p1, p2) = (ev.profile(1), ev.profile(2));
            assert!((grid_inner(&p1, &p1) - 1.0).abs() < 1e-10);
            assert!((grid_inner(&p2, &p2) - 1.0).abs() < 1e-10);
            assert!(grid_inner(&p1, &p2).abs() < 1e-10);
            assert!(ev.residual(&d) < 1e-10, "{}", ev.residual(&d));
        }
    }
}

#[test]
fn eigenvector_matches_closed_form_coefficient() {
    let d = DimensionlessParams::new(1.3, 0.4, 0.6, 2.7).unwrap();
    let cp = critical_search(&d, 100).unwrap();
    let r = 1.05 * cp.r_c;
    let ev = eigenvector(mode(cp.m_c, 1), Branch::Plus, r, &d).unwrap();
    let m = cp.m_c as f64;
    let a_ref = 2.0 * PI * m * r
        / (d.alpha * PI * (4.0 * PI * PI * m * m / (d.alpha * d.alpha) + d.kappa_a * PI * PI + ev.beta));
    let a = ev.a_coefficient().unwrap();
    assert_relative_eq!(a, a_ref, max_relative = 1e-12);
    assert_relative_eq!(ev.norm_sq(), 4.0 / (d.alpha * (1.0 + a * a)), max_relative = 1e-12);
    // Row residuals of the algebraic system written out with A.
    let (a1, a2) = diffusion_rates(ev.mode, &d);
    let s = r * 2.0 * PI * m / (d.alpha * PI);
    assert!(((-a1 - ev.beta) + s * a).abs() < 1e-10 * a1);
    assert!((s - (a2 + ev.beta) * a).abs() < 1e-10 * a2);
}

#[test]
fn exchange_patterns() {
    let d = DimensionlessParams::new(1.3, 0.4, 0.6, 2.7).unwrap();
    let cp = critical_search(&d, 30).unwrap();
    let below = exchange_of_stabilities_report(0.5 * cp.r_c, &d, 30, 6).unwrap();
    assert_eq!(below.verdict, Verdict::Consistent);
    assert!(below.positive.is_empty());
    let at = exchange_of_stabilities_report(cp.r_c, &d, 30, 6).unwrap();
    assert_eq!(at.verdict, Verdict::Consistent);
    assert_eq!(at.neutral.len(), 1);
    assert_eq!(at.neutral[0].mode, mode(cp.m_c, 1));
    assert_eq!(at.leading.mode.m.abs(), cp.m_c);
    let above = exchange_of_stabilities_report(1.1 * cp.r_c, &d, 30, 6).unwrap();
    assert_eq!(above.verdict, Verdict::Consistent);
    assert!(above
        .positive
        .iter()
        .any(|x| x.mode == mode(cp.m_c, 1) && x.branch == Branch::Plus));
}

#[test]
fn largest_rate_is_critical_mode_near_threshold() {
    let d = DimensionlessParams::new(0.8, 1.7, 0.3, 3.3).unwrap();
    let cp = critical_search(&d, 40).unwrap();
    for f in [0.999, 0.9999, 1.0, 1.0001, 1.001] {
        let rep = exchange_of_stabilities_report(f * cp.r_c, &d, 40, 5).unwrap();
        let crit = eigenvalues(mode(cp.m_c, 1), f * cp.r_c, &d).beta_plus;
        assert_eq!(rep.leading.beta, crit);
    }
}

#[test]
fn largest_rate_far_below_threshold_can_be_another_mode() {
    // Horizontally uniform modes decay at -min(Pr_z, kappa_a) pi^2 whatever R is,
    // so well below R_c they outrank the critical mode.
    let d = DimensionlessParams::new(0.8, 1.7, 0.3, 3.3).unwrap();
    let cp = critical_search(&d, 40).unwrap();
    let rep = exchange_of_stabilities_report(0.2 * cp.r_c, &d, 40, 5).unwrap();
    assert_eq!(rep.leading.mode.m, 0);
    assert_relative_eq!(rep.leading.beta, -0.3 * PI * PI, max_relative = 1e-12);
    assert_eq!(rep.verdict, Verdict::Consistent);
}

#[test]
fn rayleigh_quotient_at_eigenfunction() {
    let d = DimensionlessParams::new(1.3, 0.4, 0.6, 2.7).unwrap();
    let cp = critical_search(&d, 100).unwrap();
    let ev = eigenvector(mode(cp.m_c, 1), Branch::Plus, cp.r_c, &d).unwrap();
    let s = ev.profile(1).to_state(cp.m_c as usize + 1, 3).unwrap();
    let q = rayleigh_quotient(&s, &d).unwrap();
    assert!((q - cp.r_c).abs() < 1e-6, "{q} vs {}", cp.r_c);
}

#[test]
fn rayleigh_quotient_bounded_below() {
    let d = DimensionlessParams::new(1.3, 0.4, 0.6, 2.7).unwrap();
    let cp = critical_search(&d, 100).unwrap();
    for seed in 0..20 {
        let s = SpectralState::random(6, 5, d.alpha, 1.0, seed).unwrap();
        match rayleigh_quotient(&s, &d) {
            Ok(q) if q > 0.0 => assert!(q >= cp.r_c - 1e-6, "{q}"),
            Ok(_) => {}
            Err(e) => panic!("{e}"),
        }
    }
    let zero = SpectralState::zeros(3, 3, d.alpha).unwrap();
    assert!(matches!(rayleigh_quotient(&zero, &d), Err(crate::Error::Undefined(_))));
}

#[test]
fn oracle_reference_case() {
    let d = unit(2.0);
    let eig = dense_oracle_spectrum(10.0, &d, 1, 6).unwrap();
    let closed = eigenvalues(mode(1, 1), 10.0, &d).beta_plus;
    assert!((eig[0].re - closed).abs() < 1e-8, "{} vs {closed}", eig[0].re);
    assert!(eig.iter().all(|c| c.im.abs() < 1e-8));
}

#[test]
fn oracle_without_coupling_is_diffusion() {
    let d = DimensionlessParams::new(2.0, 0.5, 0.3, 1.5).unwrap();
    let n_max = 4;
    let eig = dense_oracle_spectrum(0.0, &d, 2, n_max).unwrap();
    let mut expected: Vec<f64> = (1..=n_max as u32)
        .flat_map(|n| {
            let (a1, a2) = diffusion_rates(mode(2, n), &d);
            [-a1, -a2]
        })
        .collect();
    expected.sort_by(|a, b| b.total_cmp(a));
    for (e, x) in eig.iter().zip(&expected) {
        assert!((e.re - x).abs() < 1e-8 * x.abs());
    }
}

#[test]
fn oracle_handles_other_signs() {
    let d = DimensionlessParams::new(1.1, 0.7, 0.4, 2.3).unwrap();
    for sign in [-1i8, 0] {
        let ds = d.with_sign(sign).with_rayleigh(15.0);
        let eig = dense_oracle_spectrum(15.0, &ds, 1, 3).unwrap();
        let mut closed: Vec<C64> = (1..=3).flat_map(|n| mode_eigenvalues(mode(1, n), &ds)).collect();
        closed.sort_by(|a, b| b.re.total_cmp(&a.re));
        for (e, c) in eig.iter().zip(&closed) {
            assert!((e.re - c.re).abs() < 1e-8 * (1.0 + c.norm()), "{e} vs {c}");
            assert!((e.im.abs() - c.im.abs()).abs() < 1e-8 * (1.0 + c.norm()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_and_determinant(
        pr_x in 0.01f64..100.0, pr_z in 0.01f64..100.0, ka in 0.01f64..10.0,
        alpha in 0.5f64..50.0, m in -20i64..20, n in 1u32..6, r in 0.0f64..500.0,
    ) {
        let d = DimensionlessParams::new(pr_x, pr_z, ka, alpha).unwrap();
        let e = eigenvalues(mode(m, n), r, &d);
        prop_assert!(e.beta_plus >= e.beta_minus);
        let s = e.beta_plus + e.beta_minus;
        prop_assert!((s + 2.0 * e.big_a).abs() <= 1e-10 * e.big_a);
        let p = e.beta_plus * e.beta_minus;
        let scale = e.big_a * e.big_a;
        prop_assert!((p - e.big_c).abs() <= 1e-10 * scale);
        prop_assert!((e.big_b * e.big_b - (e.big_a * e.big_a - e.big_c)).abs() <= 1e-10 * scale);
    }

    #[test]
    fn growth_rate_increases_with_rayleigh(
        pr_x in 0.1f64..10.0, pr_z in 0.1f64..10.0, ka in 0.1f64..10.0,
        alpha in 0.5f64..20.0, m in 1i64..10,
    ) {
        let d = DimensionlessParams::new(pr_x, pr_z, ka, alpha).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..40 {
            let b = eigenvalues(mode(m, 1), i as f64 * 2.5, &d).beta_plus;
            prop_assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn neutral_curve_matches_root(
        pr_x in 0.1f64..10.0, pr_z in 0.1f64..10.0, ka in 0.1f64..10.0,
        alpha in 0.5f64..20.0, m in 1i64..10, n in 1u32..3,
    ) {
        let d = DimensionlessParams::new(pr_x, pr_z, ka, alpha).unwrap();
        let md = mode(m, n);
        let root = neutral_by_bisection(md, &d);
        let r2 = dispersion_r2(md, &d).unwrap();
        prop_assert!((root * root - r2).abs() <= 1e-9 * r2);
    }

    #[test]
    fn oracle_agrees_with_closed_form(
        pr_x in 0.2f64..5.0, pr_z in 0.2f64..5.0, ka in 0.2f64..5.0,
        alpha in 1.0f64..6.0, m in 1i64..4, r in 0.0f64..60.0,
    ) {
        let d = DimensionlessParams::new(pr_x, pr_z, ka, alpha).unwrap();
        let n_max = 3;
        let eig = dense_oracle_spectrum(r, &d, m, n_max).unwrap();
        let mut closed: Vec<f64> = (1..=n_max as u32)
            .flat_map(|n| {
                let e = eigenvalues(mode(m, n), r, &d);
                [e.beta_plus, e.beta_minus]
            })
            .collect();
        closed.sort_by(|a, b| b.total_cmp(a));
        for (e, c) in eig.iter().zip(&closed) {
            prop_assert!((e.re - c).abs() <= 1e-8 * (1.0 + c.abs()), "{} vs {}", e, c);
            prop_assert!(e.im.abs() <= 1e-8 * (1.0 + c.abs()));
        }
    }
}

#[test]
fn cost_function_matches_dispersion() {
    let d = nondimensionalize(&example_physicals()).unwrap();
    for m in 1..10 {
        let r2 = dispersion_r2(mode(m, 1), &d).unwrap();
        let via_cost = PI.powi(4) * d.pr_z * (1.0 + d.kappa_a / d.pr_a + wavenumber_cost(m, &d));
        assert_relative_eq!(r2, via_cost, max_relative = 1e-12);
    }
}
