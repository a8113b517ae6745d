//! Center-manifold reduction just above onset: the cubic coefficient, the
//! ring of steady states and an amplitude trajectory approaching it.
//!
//! ```text
//! cargo run --example reduced_model [-- R/R_c]
//! ```

use anyhow::Result;
use thermoflow::manifold::{bifurcation_coefficient, integrate_amplitudes, ring_radius, AmplitudeState};
use thermoflow::spectrum::critical_search;
use thermoflow::DimensionlessParams;

fn main() -> Result<()> {
    let factor: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1.01);
    let base = DimensionlessParams::new(1.0, 1.0, 1.0, 4.0)?;
    let r_c = critical_search(&base, 256)?.r_c;
    let model = bifurcation_coefficient(&base.with_rayleigh(factor * r_c), 256)?;

    println!("R = {:.6} (R_c = {r_c:.6}, m_c = {})", model.rayleigh, model.m_c);
    println!("beta = {:.6e}, l = {:.6e}", model.beta, model.l);
    let ring = ring_radius(&model)?;
    println!("attractor: {ring:?}");

    let traj = integrate_amplitudes(AmplitudeState::new(1e-3, 2e-3), &model, 0.05, 80.0, 100)?;
    for s in &traj.samples {
        println!("t = {:7.2}  |x| = {:.6}  angle = {:+.4}", s.t, s.radius(), s.angle());
    }
    println!(
        "terminal radius {:.8} vs ring {:.8}",
        traj.terminal_radius,
        ring.radius()
    );
    Ok(())
}
