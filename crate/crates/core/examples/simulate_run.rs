//! Direct simulation from a small random perturbation above onset, saved
//! partway and resumed from the checkpoint, with the norms and projections
//! onto the critical modes written as CSV.
//!
//! ```text
//! cargo run --release --example simulate_run
//! ```

use std::fs::File;
use std::io::BufWriter;

use anyhow::Result;
use thermoflow::dns::{init_random, write_series_csv, Checkpoint, Simulation, SolverConfig};
use thermoflow::spectrum::{critical_search, eigenvector, Branch, ModeIndex};
use thermoflow::DimensionlessParams;

fn main() -> Result<()> {
    let base = DimensionlessParams::new(1.0, 1.0, 1.0, 4.0)?;
    let cp = critical_search(&base, 256)?;
    let d = base.with_rayleigh(1.1 * cp.r_c);
    let eig = eigenvector(ModeIndex::new(cp.m_c, 1)?, Branch::Plus, d.rayleigh, &d)?;

    let config = |t_end| SolverConfig {
        modes_x: 12,
        modes_z: 12,
        dt: SolverConfig::recommended_dt(&d, 12),
        t_end,
        diag_every: 50,
        ..SolverConfig::default()
    };
    let start = init_random(12, 12, d.alpha, 1e-2, 7)?;
    let mut first = Simulation::new(config(10.0), d, start)?.with_projection(&eig)?;
    let mut series = first.run()?;

    std::fs::create_dir_all("out/simulate")?;
    first.checkpoint().save("out/simulate/t10.state")?;
    let restart = Checkpoint::load("out/simulate/t10.state")?;
    let mut second = Simulation::resume(config(30.0), d, restart)?.with_projection(&eig)?;
    series.extend(second.run()?.into_iter().skip(1));

    for s in series.iter().step_by(10) {
        println!(
            "t = {:6.2}  l2 = {:.4e}  |(x1, x2)| = {:.4e}",
            s.t,
            s.l2(),
            s.amplitude_radius()
        );
    }
    write_series_csv(&series, BufWriter::new(File::create("out/simulate/series.csv")?))?;
    println!("wrote out/simulate/series.csv and out/simulate/t10.state");
    Ok(())
}
