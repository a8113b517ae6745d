//! Critical wavenumber, Rayleigh number and temperature difference for a
//! layer described by a config file (default: the published example).
//!
//! ```text
//! cargo run --example critical_point [-- path/to/layer.cfg]
//! ```

use anyhow::Result;
use thermoflow::harness::example_discrepancy;
use thermoflow::params::{classify_regime, nondimensionalize, DEFAULT_CRITICAL_TOL};
use thermoflow::spectrum::critical_temperature;
use thermoflow::PhysicalParams;

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/example.cfg").to_string());
    let p = PhysicalParams::load(&path)?;
    let d = nondimensionalize(&p)?;
    println!(
        "Pr_x = {:.4}, Pr_z = {:.4}, kappa_a = {:.4}, alpha = {:.4}, R = {:.4}",
        d.pr_x, d.pr_z, d.kappa_a, d.alpha, d.rayleigh
    );

    let cp = critical_temperature(&p, 1000)?;
    let t_c = cp.t_c.unwrap_or(f64::NAN);
    println!("m_c = {}, R_c = {:.6}, T_c = {:.6} K", cp.m_c, cp.r_c, t_c);
    println!("d beta / dR at R_c = {:.6e}", cp.transversal_slope);

    let regime = classify_regime(&p, t_c, DEFAULT_CRITICAL_TOL)?;
    println!("regime: {:?} (margin {:.4} K)", regime.tag, regime.margin);
    if let Some(note) = example_discrepancy(&p, &cp) {
        println!("note: {note}");
    }
    Ok(())
}
