//! Stream function of a bifurcated steady state, its cell count and a
//! gnuplot script for the contour map, written to `out/cells`.
//!
//! ```text
//! cargo run --example cell_pattern
//! gnuplot out/cells/psi.gp
//! ```

use std::fs::File;
use std::io::BufWriter;

use anyhow::Result;
use thermoflow::manifold::{bifurcated_state, bifurcation_coefficient, count_cells, ring_radius, stream_function};
use thermoflow::spectrum::critical_search;
use thermoflow::DimensionlessParams;

fn main() -> Result<()> {
    let base = DimensionlessParams::new(1.0, 1.0, 1.0, 4.0)?;
    let r_c = critical_search(&base, 256)?.r_c;
    let model = bifurcation_coefficient(&base.with_rayleigh(1.01 * r_c), 256)?;
    let radius = ring_radius(&model)?.radius();

    let sol = bifurcated_state(radius, 0.0, &model, None)?;
    let grid = stream_function(&sol).sample(128, 32)?;
    println!("m_c = {}, cells = {}", model.m_c, count_cells(&grid)?);

    std::fs::create_dir_all("out/cells")?;
    grid.write_csv(BufWriter::new(File::create("out/cells/psi.csv")?))?;
    std::fs::write("out/cells/psi.gp", grid.plot_script("psi.csv", "psi.png"))?;
    println!("wrote out/cells/psi.csv and out/cells/psi.gp");
    Ok(())
}
