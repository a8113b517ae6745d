//! Critical wavenumber over a grid in aspect ratio and Prandtl ratio, with
//! the table and a gnuplot map written to `out/sweep`.
//!
//! ```text
//! cargo run --example parameter_sweep
//! ```

use anyhow::Result;
use thermoflow::harness::{run_experiment, write_outputs, ExperimentSpec, SweepAxis, SweepGrid};

fn main() -> Result<()> {
    let grid = SweepGrid {
        alpha: SweepAxis::new(1.0, 12.0, 12)?,
        pr_a: SweepAxis::new(0.25, 4.0, 6)?,
        kappa_a: 1.0,
    };
    let report = run_experiment(&ExperimentSpec::mc_sweep(grid))?;
    if let Some(table) = report.tables.first() {
        println!("{}", table.header.join("\t"));
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            println!("{}", cells.join("\t"));
        }
    }
    print!("{}", report.summary());
    println!("manifest: {}", write_outputs(&report, "out/sweep")?.display());
    Ok(())
}
